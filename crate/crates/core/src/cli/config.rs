//! Experiment configuration files.
//!
//! Flat `key = value` lines. Global keys come first; each `[variant NAME]`
//! header opens a section whose keys apply to that variant only. `#` starts a
//! comment. Every key is checked against the experiment kind and unknown or
//! inapplicable keys are rejected with their line number.
//!
//! ```text
//! kind = arm
//! replicates = 5
//! seed = 3
//!
//! [variant mlei]
//! preset = mlei
//!
//! [variant near]
//! selector = fixed:0
//! priors = arm:3.2:2.9
//! ```

use std::path::{Path, PathBuf};

use crate::benchmarks::ArmVariant;
use crate::bo::SelectorPolicy;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Arm,
    MapAdaptation,
    Custom,
}

const COMMON_KEYS: &[&str] = &[
    "kind",
    "replicates",
    "seed",
    "episodes",
    "init_trials",
    "hyperopt_iters",
    "kernel_signal",
    "kernel_length",
    "noise",
    "out",
    "jobs",
];

impl ExperimentKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "arm" => Some(Self::Arm),
            "map-adaptation" => Some(Self::MapAdaptation),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }

    fn accepts_global(self, key: &str) -> bool {
        let extra: &[&str] = match self {
            Self::Arm => &["target"],
            Self::MapAdaptation => &["target", "maps", "condition", "true_map", "map_budget"],
            Self::Custom => &["objective", "center", "lo", "hi", "dim"],
        };
        COMMON_KEYS.contains(&key) || extra.contains(&key)
    }

    fn variant_keys(self) -> &'static [&'static str] {
        match self {
            Self::Arm => &["preset", "selector", "priors"],
            Self::MapAdaptation => &["selector"],
            Self::Custom => &["selector", "priors"],
        }
    }
}

/// One candidate prior as written in a config file.
#[derive(Clone, Debug, PartialEq)]
pub enum PriorSpec {
    Zero,
    Constant(f64),
    /// `arm:X:Y`, the reaching prior toward `(X, Y)`.
    ArmTarget([f64; 2]),
    /// `arm-set`, the ten standard arm priors drawn from the experiment seed.
    ArmSet,
}

impl PriorSpec {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "zero" {
            return Ok(Self::Zero);
        }
        if s == "arm-set" {
            return Ok(Self::ArmSet);
        }
        if let Some(v) = s.strip_prefix("const:") {
            return parse_f64(v).map(Self::Constant);
        }
        if let Some(rest) = s.strip_prefix("arm:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 2 {
                return Err(format!("arm prior needs arm:X:Y, got {s:?}"));
            }
            return Ok(Self::ArmTarget([
                parse_f64(parts[0])?,
                parse_f64(parts[1])?,
            ]));
        }
        Err(format!(
            "unknown prior {s:?} (expected zero, const:V, arm:X:Y or arm-set)"
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `−‖x − center‖²`.
    Sphere,
    /// Negated Rastrigin function around `center`.
    Rastrigin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariantSpec {
    pub name: String,
    pub preset: Option<ArmVariant>,
    pub selector: Option<SelectorPolicy>,
    pub priors: Option<Vec<PriorSpec>>,
    line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub replicates: usize,
    pub seed: u64,
    pub episodes: usize,
    pub init_trials: usize,
    pub hyperopt_iters: usize,
    pub kernel_signal: f64,
    pub kernel_length: Vec<f64>,
    pub noise: f64,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub target: Option<[f64; 2]>,
    pub maps: Vec<PathBuf>,
    pub condition: Option<String>,
    pub true_map: Option<PathBuf>,
    pub map_budget: Option<usize>,
    pub objective: Option<Objective>,
    pub center: Option<Vec<f64>>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub dim: Option<usize>,
    pub variants: Vec<VariantSpec>,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(parse_f64).collect()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("not a non-negative integer: {s:?}"))
}

impl ExperimentConfig {
    /// Parses configuration text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut globals: Vec<(usize, String, String)> = Vec::new();
        let mut sections: Vec<(usize, String, Vec<(usize, String, String)>)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(header) = content.strip_prefix('[') {
                let name = header
                    .strip_suffix(']')
                    .and_then(|h| h.trim().strip_prefix("variant"))
                    .map(str::trim)
                    .filter(|n| !n.is_empty() && !n.contains(char::is_whitespace))
                    .ok_or_else(|| Error::parse(line, format!("bad section header {content:?}")))?;
                if sections.iter().any(|(_, n, _)| n == name) {
                    return Err(Error::parse(line, format!("duplicate variant {name:?}")));
                }
                sections.push((line, name.to_string(), Vec::new()));
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| {
                Error::parse(line, format!("expected key = value, got {content:?}"))
            })?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            let bucket = match sections.last_mut() {
                Some((_, _, entries)) => entries,
                None => &mut globals,
            };
            if bucket.iter().any(|(_, key, _)| *key == k) {
                return Err(Error::parse(line, format!("duplicate key {k:?}")));
            }
            bucket.push((line, k, v));
        }

        let kind = {
            let (line, _, v) = globals
                .iter()
                .find(|(_, k, _)| k == "kind")
                .ok_or_else(|| Error::parse(1, "missing required key `kind`"))?;
            ExperimentKind::parse(v).ok_or_else(|| {
                Error::parse(
                    *line,
                    format!("unknown kind {v:?} (expected arm, map-adaptation or custom)"),
                )
            })?
        };

        let mut cfg = ExperimentConfig {
            kind,
            replicates: 30,
            seed: 0,
            episodes: 20,
            init_trials: 3,
            hyperopt_iters: crate::gp::rprop::DEFAULT_ITERATIONS,
            kernel_signal: 1.0,
            kernel_length: vec![1.0],
            noise: crate::gp::DEFAULT_NOISE_SIGMA,
            out: None,
            jobs: None,
            target: None,
            maps: Vec::new(),
            condition: None,
            true_map: None,
            map_budget: None,
            objective: None,
            center: None,
            lo: None,
            hi: None,
            dim: None,
            variants: Vec::new(),
        };
        let resolve = |p: &str| -> PathBuf {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };

        for (line, k, v) in &globals {
            let line = *line;
            if !kind.accepts_global(k) {
                return Err(Error::parse(line, format!("unknown key {k:?}")));
            }
            let res: std::result::Result<(), String> = (|| {
                match k.as_str() {
                    "kind" => {}
                    "replicates" => cfg.replicates = parse_num(v)?,
                    "seed" => cfg.seed = parse_num(v)?,
                    "episodes" => cfg.episodes = parse_num(v)?,
                    "init_trials" => cfg.init_trials = parse_num(v)?,
                    "hyperopt_iters" => cfg.hyperopt_iters = parse_num(v)?,
                    "kernel_signal" => cfg.kernel_signal = parse_f64(v)?,
                    "kernel_length" => cfg.kernel_length = parse_list(v)?,
                    "noise" => cfg.noise = parse_f64(v)?,
                    "out" => cfg.out = Some(resolve(v)),
                    "jobs" => cfg.jobs = Some(parse_num(v)?),
                    "target" => {
                        let t = parse_list(v)?;
                        if t.len() != 2 {
                            return Err("target needs two coordinates".into());
                        }
                        cfg.target = Some([t[0], t[1]]);
                    }
                    "maps" => cfg.maps = v.split(',').map(|p| resolve(p.trim())).collect(),
                    "condition" => cfg.condition = Some(v.clone()),
                    "true_map" => cfg.true_map = Some(resolve(v)),
                    "map_budget" => cfg.map_budget = Some(parse_num(v)?),
                    "objective" => {
                        cfg.objective = Some(match v.as_str() {
                            "sphere" => Objective::Sphere,
                            "rastrigin" => Objective::Rastrigin,
                            _ => {
                                return Err(format!(
                                    "unknown objective {v:?} (expected sphere or rastrigin)"
                                ))
                            }
                        })
                    }
                    "center" => cfg.center = Some(parse_list(v)?),
                    "lo" => cfg.lo = Some(parse_f64(v)?),
                    "hi" => cfg.hi = Some(parse_f64(v)?),
                    "dim" => cfg.dim = Some(parse_num(v)?),
                    _ => unreachable!("key table and match disagree"),
                }
                Ok(())
            })();
            res.map_err(|m| Error::parse(line, format!("{k}: {m}")))?;
        }

        for (line, name, entries) in sections {
            let mut spec = VariantSpec {
                name,
                preset: None,
                selector: None,
                priors: None,
                line,
            };
            for (eline, k, v) in entries {
                if !kind.variant_keys().contains(&k.as_str()) {
                    return Err(Error::parse(eline, format!("unknown variant key {k:?}")));
                }
                let res: std::result::Result<(), String> = (|| {
                    match k.as_str() {
                        "preset" => {
                            spec.preset = Some(ArmVariant::parse(&v).map_err(|e| e.to_string())?)
                        }
                        "selector" => {
                            spec.selector =
                                Some(SelectorPolicy::parse(&v).map_err(|e| e.to_string())?)
                        }
                        "priors" => {
                            spec.priors = Some(
                                v.split(',')
                                    .map(PriorSpec::parse)
                                    .collect::<std::result::Result<_, _>>()?,
                            )
                        }
                        _ => unreachable!("key table and match disagree"),
                    }
                    Ok(())
                })();
                res.map_err(|m| Error::parse(eline, format!("{k}: {m}")))?;
            }
            cfg.variants.push(spec);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn check(&self) -> Result<()> {
        if self.variants.is_empty() {
            return Err(Error::usage(
                "configuration declares no [variant NAME] section",
            ));
        }
        if self.replicates == 0 || self.episodes == 0 {
            return Err(Error::usage("replicates and episodes must be at least 1"));
        }
        for v in &self.variants {
            let fail = |m: &str| Err(Error::parse(v.line, format!("variant {}: {m}", v.name)));
            match self.kind {
                ExperimentKind::Arm => match (
                    v.preset.is_some(),
                    v.selector.is_some() || v.priors.is_some(),
                ) {
                    (true, true) => return fail("preset excludes selector and priors"),
                    (false, false) => return fail("needs either preset or selector"),
                    (false, true) if v.selector.is_none() => return fail("needs a selector"),
                    _ => {}
                },
                ExperimentKind::MapAdaptation => {
                    if v.selector.is_none() {
                        return fail("needs a selector");
                    }
                }
                ExperimentKind::Custom => {
                    if v.selector.is_none() {
                        return fail("needs a selector");
                    }
                    if v.priors
                        .iter()
                        .flatten()
                        .any(|p| matches!(p, PriorSpec::ArmTarget(_) | PriorSpec::ArmSet))
                    {
                        return fail("arm priors only apply to kind = arm");
                    }
                }
            }
        }
        match self.kind {
            ExperimentKind::MapAdaptation => {
                if self.maps.is_empty() {
                    return Err(Error::usage("map-adaptation needs `maps`"));
                }
                if self.condition.is_none() {
                    return Err(Error::usage("map-adaptation needs `condition`"));
                }
            }
            ExperimentKind::Custom => {
                if self.objective.is_none() || self.dim.is_none() {
                    return Err(Error::usage(
                        "custom experiments need `objective` and `dim`",
                    ));
                }
            }
            ExperimentKind::Arm => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::parse(text, Path::new("/base"))
    }

    #[test]
    fn arm_config_with_presets_and_custom_variant() {
        let c = parse(
            "kind = arm\nreplicates = 4 # small\nseed=9\nout = r.csv\n\n[variant mlei]\npreset = mlei\n\
             [variant near]\nselector = fixed:0\npriors = arm:3.2:2.9, const:-7\n",
        )
        .unwrap();
        assert_eq!(c.kind, ExperimentKind::Arm);
        assert_eq!((c.replicates, c.seed), (4, 9));
        assert_eq!(c.out.as_deref(), Some(Path::new("/base/r.csv")));
        assert_eq!(c.variants[0].preset, Some(ArmVariant::Mlei));
        assert_eq!(
            c.variants[1].priors.as_deref(),
            Some(&[PriorSpec::ArmTarget([3.2, 2.9]), PriorSpec::Constant(-7.0)][..])
        );
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let e = parse("kind = arm\nbogus = 1\n[variant a]\npreset = mlei\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse("kind = arm\n[variant a]\npreset = mlei\ncolor = red\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }), "{e}");
        // Keys of another experiment kind do not apply.
        let e = parse("kind = arm\nmaps = a.map\n[variant a]\npreset = mlei\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn malformed_input_is_reported() {
        assert!(parse("replicates = 3\n").is_err());
        assert!(parse("kind = arm\n").is_err());
        assert!(parse("kind = arm\nreplicates = -1\n[variant a]\npreset = mlei\n").is_err());
        assert!(parse("kind = arm\n[variant a]\n[variant a]\n").is_err());
        assert!(parse("kind = arm\njust text\n").is_err());
        assert!(parse("kind = arm\n[variant a]\npreset = mlei\nselector = mlei\n").is_err());
        assert!(parse("kind = custom\ndim = 2\nobjective = sphere\n[variant a]\nselector = mlei\npriors = arm-set\n").is_err());
    }
}
