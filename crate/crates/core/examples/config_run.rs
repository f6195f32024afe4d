//! Runs an experiment from an inline TOML config, as the `skewmix run`
//! command does, and prints the verdicts.

use skewmix::cli::{parse_config, run};

const CONFIG: &str = r#"
[system]
preset = "bernoulli_s1"

[observables.phi]
preset = "cosine"
omega = 1.0

[experiment]
kind = "correlate"
n = [0, 2, 4, 8]
estimators = ["exact", "spectral"]
"#;

fn main() -> skewmix::Result<()> {
    let dir = std::env::temp_dir().join("skewmix-config-run");
    let config = parse_config(CONFIG, &[format!("output.dir={:?}", dir.display().to_string())])?;
    let manifest = run(&config)?;
    for v in &manifest.verdicts {
        println!("{:?} {}: {}", v.status, v.name, v.detail);
    }
    println!("outputs in {}: {}", dir.display(), manifest.outputs.join(", "));
    Ok(())
}
