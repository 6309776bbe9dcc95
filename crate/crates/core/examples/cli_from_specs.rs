//! Drives the command-line front end with the JSON specs in `examples/specs`
//! and lists the files it produced.

use std::path::Path;

fn main() {
    let specs = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/specs");
    let out = std::env::temp_dir().join("thermoscope-cli-example");
    let spec = |name: &str| specs.join(name).display().to_string();
    let out_s = out.display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["map-table".into(), "--map".into(), spec("cubic_pair.json"), "--samples".into(), "11".into()],
        vec![
            "pressure".into(),
            "--map".into(),
            spec("cubic_pair.json"),
            "--potential".into(),
            spec("trig.json"),
            "--t-min".into(),
            "-2".into(),
            "--t-max".into(),
            "2".into(),
            "--t-samples".into(),
            "21".into(),
            "--ulam-n".into(),
            "256".into(),
        ],
        vec![
            "spectrum".into(),
            "--map".into(),
            spec("doubling.json"),
            "--potential".into(),
            spec("indicator_right_half.json"),
            "--interval".into(),
            "0.25,0.25".into(),
            "--interval".into(),
            "0.4,0.6".into(),
            "--ulam-n".into(),
            "64".into(),
        ],
    ];
    for args in runs {
        let mut full = vec!["thermoscope".to_string()];
        full.extend(args.iter().cloned());
        full.extend(["--out".to_string(), out_s.clone()]);
        let code = thermoscope::cli::main_with_args(full);
        println!("{} -> exit {code}", args[0]);
    }
    for entry in std::fs::read_dir(&out).expect("output directory") {
        let path = entry.expect("entry").path();
        let lines = std::fs::read_to_string(&path).map(|s| s.lines().count()).unwrap_or(0);
        println!("{} ({lines} lines)", path.display());
    }
}
