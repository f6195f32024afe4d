//! Command-line front end: `run`, `list-presets` and `validate`.

mod config;
mod output;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{apply_override, load_config, parse_config, ExperimentBlock, ExperimentConfig, Kind, OutputConfig};
pub use output::{line_plot, Line, ResultManifest, Status, Verdict, MANIFEST_FILE, TIMINGS_FILE};
pub use run::run;

use crate::error::Result;
use crate::observables::{GLOBAL_PRESETS, LOCAL_PRESETS};
use crate::systems::SystemPreset;

#[derive(Debug, Parser)]
#[command(name = "skewmix", version, about = "Global-local mixing experiments for skew products over subshifts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base seed, overriding `experiment.seed`.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Override a config leaf by dotted path, e.g. `experiment.alpha=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, value_enum)]
    pub plots: Option<Toggle>,
}

impl RunArgs {
    /// `--set` assignments followed by the dedicated flags, which win.
    pub fn overrides(&self) -> Vec<String> {
        let mut all = self.set.clone();
        if let Some(dir) = &self.out {
            all.push(format!("output.dir={:?}", dir.display().to_string()));
        }
        if let Some(seed) = self.seed {
            all.push(format!("experiment.seed={seed}"));
        }
        if let Some(p) = self.plots {
            all.push(format!("output.plots={}", p == Toggle::On));
        }
        all
    }

    pub fn load(&self) -> Result<ExperimentConfig> {
        load_config(&self.config, &self.overrides())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured experiment and write CSVs and the manifest.
    Run(RunArgs),
    /// Print the named systems and observables.
    ListPresets,
    /// Parse and check a config without running it.
    Validate(RunArgs),
}

/// Preset listing in a fixed order.
pub fn list_presets() -> String {
    let mut s = String::from("systems:\n");
    for p in SystemPreset::ALL {
        s.push_str(&format!("  {:<24} {}\n", p.name(), p.description()));
    }
    s.push_str("local observables (psi):\n");
    for (name, desc) in LOCAL_PRESETS {
        s.push_str(&format!("  {name:<24} {desc}\n"));
    }
    s.push_str("global observables (phi):\n");
    for (name, desc) in GLOBAL_PRESETS {
        s.push_str(&format!("  {name:<24} {desc}\n"));
    }
    s
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::ListPresets => {
            print!("{}", list_presets());
            Ok(0)
        }
        Command::Validate(args) => args.load().and_then(|c| {
            let sys = c.build_system()?;
            c.build_phi(&sys.sft)?;
            c.build_psi(&sys.sft)?;
            println!("{}: ok ({} experiment on {})", args.config.display(), c.experiment.kind.name(), sys.name);
            Ok(0)
        }),
        Command::Run(args) => args.load().and_then(|c| {
            let manifest = run(&c)?;
            for v in &manifest.verdicts {
                println!("{:<8} {:<36} {}", format!("{:?}", v.status).to_lowercase(), v.name, v.detail);
            }
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} files to {}", manifest.outputs.len(), c.output.dir);
            Ok(if manifest.passed() { 0 } else { 1 })
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        2
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_is_stable_and_complete() {
        let a = list_presets();
        assert_eq!(a, list_presets());
        for name in [
            "bernoulli_s1",
            "golden_mean",
            "lattice_counterexample",
            "gaussian_bump",
            "cosine",
            "inverse_abs",
            "mollified_indicator",
        ] {
            assert!(a.contains(name), "{name}");
        }
        assert!(a.contains("1/(1+|r|)"));
        let lattice = a.lines().find(|l| l.contains("lattice_counterexample")).unwrap();
        assert!(lattice.contains("non-accessible"));
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from([
            "skewmix",
            "run",
            "--config",
            "x.toml",
            "--set",
            "experiment.seed=1",
            "--seed",
            "9",
            "--plots",
            "on",
            "--out",
            "d",
        ])
        .unwrap();
        let Command::Run(args) = cli.command else { panic!() };
        let c = parse_config("[experiment]\nkind = \"gibbs\"\n", &args.overrides()).unwrap();
        assert_eq!(c.experiment.seed, 9);
        assert!(c.output.plots);
        assert_eq!(c.output.dir, "d");
    }

    #[test]
    fn golden_mean_gibbs_run() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("out");
        let c = parse_config(
            "[system]\npreset = \"golden_mean\"\n[experiment]\nkind = \"gibbs\"\n",
            &[format!("output.dir={:?}", dir.display().to_string()), "output.plots=true".into()],
        )
        .unwrap();
        let m = run(&c).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((m.results["lambda"].as_f64().unwrap() - phi).abs() < 1e-10);
        assert!(m.passed());
        let mut on_disk: Vec<String> =
            std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        on_disk.sort();
        assert_eq!(on_disk, m.outputs);
        let gibbs: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("gibbs.json")).unwrap()).unwrap();
        for key in ["lambda", "h", "nu", "g", "mu"] {
            assert!(gibbs.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn constant_phi_correlations_vanish() {
        let tmp = tempfile::tempdir().unwrap();
        let c = parse_config(
            "[system]\npreset = \"bernoulli_s1\"\n[observables.phi]\npreset = \"constant_one\"\n[experiment]\nkind = \"correlate\"\nestimators = [\"exact\", \"spectral\"]\n",
            &[format!("output.dir={:?}", tmp.path().display().to_string())],
        )
        .unwrap();
        let m = run(&c).unwrap();
        let v = m.verdicts.iter().find(|v| v.name == "constant_phi_zero").unwrap();
        assert_eq!(v.status, Status::Pass, "{}", v.detail);
        assert!(m.passed(), "{:?}", m.verdicts);
    }

    #[test]
    fn runs_are_bit_identical() {
        let tmp = tempfile::tempdir().unwrap();
        let text = "[system]\npreset = \"bernoulli_s1\"\n[experiment]\nkind = \"correlate\"\nestimators = [\"direct\"]\nsamples = 2000\nseed = 5\n";
        let mut files = Vec::new();
        for k in 0..2 {
            let dir = tmp.path().join(format!("r{k}"));
            let c = parse_config(text, &[format!("output.dir={:?}", dir.display().to_string())]).unwrap();
            run(&c).unwrap();
            files.push(std::fs::read_to_string(dir.join("cov_direct.csv")).unwrap());
        }
        assert_eq!(files[0], files[1]);
    }
}
