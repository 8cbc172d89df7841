//! Run configuration: a flat `key = value` file with command-line overrides.
//!
//! Precedence, lowest first: built-in defaults, the config file, `--set`
//! pairs, dedicated flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use kgrules::generalize::GenConfig;
use kgrules::specialize::{LearnConfig, Measure, ScoreConfig};
use sha2::{Digest, Sha256};

/// Every accepted key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("dataset-dir", "", "directory holding train.txt, valid.txt, test.txt"),
    ("out-dir", "out", "where rules/, the manifest and reports are written"),
    ("targets", "all", "comma-separated target predicates, or `all`"),
    ("sat", "0.99", "saturation threshold of generalisation"),
    ("bs", "10000", "paths per saturation check"),
    ("len", "3", "maximum body length of sampled paths"),
    ("paths-per-call", "100", "walks per sampler call"),
    ("seed", "42", "run seed"),
    ("gen-time-ms", "60000", "generalisation guard per target, 0 for none"),
    ("measure", "SMC", "quality measure: SC, SMC or PCA"),
    ("eta", "5", "smoothing offset of SMC"),
    ("conf", "0.001", "minimum quality"),
    ("supp", "3", "minimum support"),
    ("hc", "0.001", "minimum head coverage"),
    ("max-ins-len", "3", "maximum HAR/BAR body length, 0 disables them"),
    ("max-car-len", "3", "maximum CAR body length, 0 disables them"),
    ("grounding-cap", "100000", "maximum groundings per abstract rule"),
    ("per-target-time-ms", "600000", "learning budget per target, 0 for none"),
    ("max-rules", "1000000", "rules generated per target before stopping"),
    ("theta", "0.1", "overfitting factor of the validation filter"),
    ("thetas", "0,0.05,0.1,0.2,0.4", "overfitting factors swept by analyze-overfit"),
    ("validation", "false", "apply the validation filter before kgc"),
    ("workers", "0", "worker threads, 0 for one per core"),
    ("candidates-per-rule", "1000", "kgc candidates taken from one rule"),
    ("query-time-ms", "5000", "kgc time limit per query"),
];

/// Raw key/value pairs after merging every source.
#[derive(Clone, Debug)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

/// Splits `insA-carB` into its two lengths.
pub fn parse_ins_car(s: &str) -> Result<(usize, usize)> {
    let err = || anyhow!("expected `insA-carB`, found `{s}`");
    let (ins, car) = s.split_once('-').ok_or_else(err)?;
    let a = ins.strip_prefix("ins").ok_or_else(err)?.parse().map_err(|_| err())?;
    let b = car.strip_prefix("car").ok_or_else(err)?.parse().map_err(|_| err())?;
    Ok((a, b))
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        if key == "ins-car" {
            let (a, b) = parse_ins_car(value)?;
            self.values.insert("max-ins-len".into(), a.to_string());
            self.values.insert("max-car-len".into(), b.to_string());
            return Ok(());
        }
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            bail!("unknown config key `{key}`");
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` pair.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, found `{pair}`"))?;
        self.set(k, v)
    }

    /// Reads a config file: one `key = value` per line, `#` starts a comment.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line)
                .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.get(key);
        v.parse().map_err(|e| anyhow!("bad value `{v}` for `{key}`: {e}"))
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        let ms = |key: &str| -> Result<Option<Duration>> {
            let v: u64 = self.parse(key)?;
            Ok((v > 0).then(|| Duration::from_millis(v)))
        };
        let targets = match self.get("targets") {
            "all" | "" => Targets::All,
            list => Targets::Named(list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()),
        };
        let thetas = self
            .get("thetas")
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("bad theta `{s}`: {e}")))
            .collect::<Result<Vec<_>>>()?;
        let workers: usize = self.parse("workers")?;
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        let measure: Measure = self.get("measure").parse().map_err(|e: String| anyhow!(e))?;
        let cfg = RunConfig {
            dataset_dir: PathBuf::from(self.get("dataset-dir")),
            out_dir: PathBuf::from(self.get("out-dir")),
            targets,
            learn: LearnConfig {
                gen: GenConfig {
                    saturation: self.parse("sat")?,
                    batch_size: self.parse("bs")?,
                    max_len: self.parse("len")?,
                    paths_per_call: self.parse("paths-per-call")?,
                    seed: self.parse("seed")?,
                    time_limit: ms("gen-time-ms")?,
                },
                score: ScoreConfig {
                    measure,
                    eta: self.parse("eta")?,
                    conf_threshold: self.parse("conf")?,
                    supp_threshold: self.parse("supp")?,
                    hc_threshold: self.parse("hc")?,
                },
                max_ins_len: self.parse("max-ins-len")?,
                max_car_len: self.parse("max-car-len")?,
                grounding_cap: self.parse("grounding-cap")?,
                time_budget: ms("per-target-time-ms")?,
                max_rules: self.parse("max-rules")?,
                chunk: workers,
            },
            theta: self.parse("theta")?,
            thetas,
            validation: self.parse("validation")?,
            workers,
            candidates_per_rule: self.parse("candidates-per-rule")?,
            query_time: Duration::from_millis(self.parse("query-time-ms")?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn echo(&self) -> BTreeMap<String, String> {
        self.values.clone()
    }

    /// SHA-256 of the canonical echo, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.values {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Targets {
    All,
    Named(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dataset_dir: PathBuf,
    pub out_dir: PathBuf,
    pub targets: Targets,
    pub learn: LearnConfig,
    pub theta: f64,
    pub thetas: Vec<f64>,
    pub validation: bool,
    pub workers: usize,
    pub candidates_per_rule: usize,
    pub query_time: Duration,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.learn.gen;
        if g.max_len == 0 {
            bail!("len must be at least 1");
        }
        if self.learn.max_ins_len > g.max_len || self.learn.max_car_len > g.max_len {
            bail!(
                "max-ins-len ({}) and max-car-len ({}) may not exceed len ({})",
                self.learn.max_ins_len,
                self.learn.max_car_len,
                g.max_len
            );
        }
        if !(g.saturation > 0.0 && g.saturation <= 1.0) {
            bail!("sat must lie in (0, 1], found {}", g.saturation);
        }
        if g.batch_size == 0 || g.paths_per_call == 0 {
            bail!("bs and paths-per-call must be positive");
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        for &t in self.thetas.iter().chain([&self.theta]) {
            if !(0.0..=1.0).contains(&t) {
                bail!("overfitting factors must lie in [0, 1], found {t}");
            }
        }
        if self.learn.score.eta < 0.0 {
            bail!("eta may not be negative");
        }
        Ok(())
    }

    pub fn rules_dir(&self) -> PathBuf {
        self.out_dir.join("rules")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let cfg = Settings::default().resolve().unwrap();
        assert_eq!(cfg.learn.gen.batch_size, 10_000);
        assert_eq!(cfg.learn.score.measure, Measure::Smc);
        assert_eq!(cfg.learn.score.supp_threshold, 3);
        assert_eq!(cfg.targets, Targets::All);
        assert!(cfg.workers >= 1);
    }

    #[test]
    fn ins_car_sets_both_lengths() {
        let mut s = Settings::default();
        s.set("ins-car", "ins0-car3").unwrap();
        let cfg = s.resolve().unwrap();
        assert_eq!((cfg.learn.max_ins_len, cfg.learn.max_car_len), (0, 3));
        assert!(parse_ins_car("ins1car3").is_err());
        assert!(parse_ins_car("insx-car3").is_err());
    }

    #[test]
    fn invalid_lengths_and_keys_are_rejected() {
        let mut s = Settings::default();
        s.set("len", "2").unwrap();
        assert!(s.resolve().is_err());
        s.set("ins-car", "ins2-car1").unwrap();
        assert!(s.resolve().is_ok());
        assert!(s.set("nope", "1").is_err());
        let mut s = Settings::default();
        s.set("sat", "1.5").unwrap();
        assert!(s.resolve().is_err());
    }

    #[test]
    fn config_file_and_hash() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nseed = 7\n\nmeasure=pca  # trailing\ntargets = a, b\n").unwrap();
        let mut s = Settings::default();
        let before = s.hash();
        s.load_file(&path).unwrap();
        assert_ne!(s.hash(), before);
        let cfg = s.resolve().unwrap();
        assert_eq!(cfg.learn.gen.seed, 7);
        assert_eq!(cfg.learn.score.measure, Measure::Pca);
        assert_eq!(cfg.targets, Targets::Named(vec!["a".into(), "b".into()]));
        std::fs::write(&path, "seed 7\n").unwrap();
        let err = Settings::default().load_file(&path).unwrap_err();
        assert!(format!("{err:#}").contains("run.conf:1"));
    }
}
