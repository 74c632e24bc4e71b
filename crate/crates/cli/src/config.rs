//! Run configuration: command-line flags merged over an optional key=value
//! (TOML) file. Flags win.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use qwalks::asymptotics::ClusterProfile;
use qwalks::QParam;

use crate::CliError;

/// Keys accepted in the configuration file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub q: Option<f64>,
    pub gamma: Option<f64>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub x: Option<Vec<i64>>,
    pub breakpoints: Option<Vec<f64>>,
    pub offsets: Option<Vec<f64>>,
    pub seeds: Option<usize>,
    pub cap: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// key=value configuration file; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// q in (0, 1)
    #[arg(long, global = true)]
    pub q: Option<f64>,
    /// gamma > 0; with --m this sets q = exp(-gamma/m)
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// number of walks
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// output file or directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Where q comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QSpec {
    Direct(f64),
    Scaled { gamma: f64 },
    Unset,
}

/// Merged and checked configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub q: QSpec,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        // q and gamma override the file as a pair
        let (q, gamma) = if args.q.is_some() || args.gamma.is_some() {
            (args.q, args.gamma)
        } else {
            (file.q, file.gamma)
        };
        let q = match (q, gamma) {
            (Some(_), Some(_)) => return Err(CliError::Config("q and gamma are mutually exclusive".into())),
            (Some(v), None) => QSpec::Direct(v),
            (None, Some(g)) => {
                if !(g > 0.0 && g.is_finite()) {
                    return Err(CliError::Config(format!("gamma must be positive, got {g}")));
                }
                QSpec::Scaled { gamma: g }
            }
            (None, None) => QSpec::Unset,
        };
        let tol = args.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t > 0.0) {
                return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(RunConfig {
            q,
            m: args.m.or(file.m),
            seed: args.seed.or(file.seed),
            out: args.out.clone().or_else(|| file.out.clone()),
            tol,
            threads,
            file,
        })
    }

    /// q for a run with m walks: given directly or as exp(−γ/m).
    pub fn walk_q(&self, m: usize) -> Result<QParam, CliError> {
        let v = match self.q {
            QSpec::Direct(v) => v,
            QSpec::Scaled { gamma } => (-gamma / m as f64).exp(),
            QSpec::Unset => return Err(CliError::Config("specify --q or --gamma with --m".into())),
        };
        Ok(QParam::new(v)?)
    }

    /// γ for the asymptotic commands; q alone does not determine it.
    pub fn gamma(&self, default: f64) -> Result<f64, CliError> {
        match self.q {
            QSpec::Scaled { gamma } => Ok(gamma),
            QSpec::Unset => Ok(default),
            QSpec::Direct(_) => Err(CliError::Config("this command takes --gamma, not --q".into())),
        }
    }

    pub fn x(&self, flag: &Option<Vec<i64>>) -> Option<Vec<i64>> {
        flag.clone().or_else(|| self.file.x.clone())
    }

    /// The cluster profile from flags or file, or the given default.
    pub fn profile(
        &self,
        breakpoints: &Option<Vec<f64>>,
        offsets: &Option<Vec<f64>>,
        gamma: f64,
        default: (&[f64], &[f64]),
    ) -> Result<ClusterProfile, CliError> {
        let a = breakpoints.clone().or_else(|| self.file.breakpoints.clone());
        let c = offsets.clone().or_else(|| self.file.offsets.clone());
        let (a, c) = match (a, c) {
            (Some(a), Some(c)) => (a, c),
            (None, None) => (default.0.to_vec(), default.1.to_vec()),
            _ => return Err(CliError::Config("give both --breakpoints and --offsets".into())),
        };
        Ok(ClusterProfile::new(a, c, gamma)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_file(text: &str, args: CommonArgs) -> Result<RunConfig, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, text).unwrap();
        RunConfig::resolve(&CommonArgs {
            config: Some(p),
            ..args
        })
    }

    #[test]
    fn flags_override_file() {
        let c = with_file(
            "q = 0.3\nseed = 9\nx = [3, 1]\n",
            CommonArgs {
                seed: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.q, QSpec::Direct(0.3));
        assert_eq!(c.x(&None), Some(vec![3, 1]));
        assert_eq!(c.x(&Some(vec![2])), Some(vec![2]));

        // a gamma flag replaces the file's q
        let c = with_file(
            "q = 0.3\n",
            CommonArgs {
                gamma: Some(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(c.q, QSpec::Scaled { gamma: 2.0 });
        assert!((c.walk_q(4).unwrap().value() - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_settings() {
        let both = CommonArgs {
            q: Some(0.5),
            gamma: Some(1.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&both).is_err());
        assert!(with_file("q = 0.5\ngamma = 1.0\n", CommonArgs::default()).is_err());
        assert!(with_file("bogus = 1\n", CommonArgs::default()).is_err());
        let tol = CommonArgs {
            tol: Some(0.0),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&tol).is_err());
        let c = RunConfig::resolve(&CommonArgs {
            q: Some(1.5),
            ..Default::default()
        })
        .unwrap();
        assert!(c.walk_q(2).is_err());
    }
}
