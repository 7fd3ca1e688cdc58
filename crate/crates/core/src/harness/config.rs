//! `key=value` run configuration with fail-closed parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::solver::{SolveConfig, SolveMethod};
use crate::waves::WaveSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("unknown option '--{0}'")]
    UnknownFlag(String),
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("invalid {field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Hs,
    Mhs,
    Hs2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Eb1,
    Eb2,
    H1,
    H2,
    Ms,
}

macro_rules! keyword_enum {
    ($ty:ident { $($var:ident => $s:literal),* $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($ty::$var => $s),* }
            }
        }
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($s => Ok($ty::$var),)*
                    other => Err(format!("unknown value '{other}'")),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(Problem { Hs => "hs", Mhs => "mhs", Hs2 => "hs2" });
keyword_enum!(Scheme { Eb1 => "eb1", Eb2 => "eb2", H1 => "h1", H2 => "h2", Ms => "ms" });

impl Problem {
    pub fn allows(self, scheme: Scheme) -> bool {
        match self {
            Problem::Hs => matches!(scheme, Scheme::Eb1 | Scheme::Eb2 | Scheme::H1 | Scheme::H2),
            Problem::Mhs | Problem::Hs2 => matches!(scheme, Scheme::Ms | Scheme::H1),
        }
    }

    pub fn is_periodic(self) -> bool {
        !matches!(self, Problem::Hs)
    }

    /// Travelling-wave parameters used when the configuration gives none.
    pub fn default_wave(self) -> Option<WaveSpec> {
        match self {
            Problem::Hs => None,
            Problem::Mhs => Some(WaveSpec::Mhs { omega: 1.5, min: -0.1, max: 0.5, speed: 1.0 }),
            Problem::Hs2 => Some(WaveSpec::Hs2 { b: 1.0, min: -1.0, max: 1.0, speed: 2.0, kappa: 1.0 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub scheme: Scheme,
    /// Half-width of the half-line domain; periodic problems take the wave period.
    pub length: Option<f64>,
    pub n: usize,
    pub dt: f64,
    pub tend: f64,
    pub out: Option<PathBuf>,
    /// Profile snapshot stride in steps.
    pub record_every: usize,
    pub seed: u64,
    pub solver: SolveConfig,
    pub wave: Option<WaveSpec>,
}

pub const DEFAULT_RECORD_EVERY: usize = 10;

/// Longest `tend / dt` the harness accepts.
pub const MAX_STEPS: usize = 10_000_000;

const KEYS: &[&str] = &[
    "version",
    "problem",
    "scheme",
    "L",
    "N",
    "dt",
    "tend",
    "out",
    "record_every",
    "seed",
    "solver_method",
    "solver_tol",
    "solver_max_iter",
    "solver_fd_eps",
    "omega",
    "m",
    "M",
    "c",
    "b",
    "z",
    "Z",
    "kappa",
];

const MHS_KEYS: &[&str] = &["omega", "m", "M"];
const HS2_KEYS: &[&str] = &["b", "z", "Z", "kappa"];

impl RunConfig {
    /// Number of time steps, `tend / dt`.
    pub fn steps(&self) -> usize {
        (self.tend / self.dt).round() as usize
    }

    /// Parse from `key=value` text.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_entries(read_entries(text)?)
    }

    /// Parse a file, then apply `overrides` (later entries win).
    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut entries = read_entries(&text)?;
        for (k, v) in overrides {
            if !KEYS.contains(&k.as_str()) {
                return Err(ConfigError::UnknownFlag(k.clone()));
            }
            entries.insert(k.clone(), (0, v.clone()));
        }
        Self::from_entries(entries)
    }

    fn from_entries(entries: BTreeMap<String, (usize, String)>) -> Result<Self, ConfigError> {
        let get = |k: &str| entries.get(k).map(|(_, v)| v.as_str());
        let mut missing: Vec<String> =
            ["problem", "scheme", "N", "dt", "tend"].iter().filter(|k| get(k).is_none()).map(|k| k.to_string()).collect();
        if get("problem") == Some("hs") && get("L").is_none() {
            missing.push("L".into());
        }
        if !missing.is_empty() {
            return Err(ConfigError::Missing(missing));
        }

        let problem: Problem = field(&entries, "problem")?.expect("checked above");
        let scheme: Scheme = field(&entries, "scheme")?.expect("checked above");
        if !problem.allows(scheme) {
            return Err(invalid("scheme", format!("'{scheme}' is not available for problem '{problem}'")));
        }
        let length: Option<f64> = field(&entries, "L")?;
        if problem.is_periodic() && length.is_some() {
            return Err(invalid("L", "periodic problems take the domain length from the wave period".into()));
        }

        let defaults = SolveConfig::default();
        let solver = SolveConfig {
            method: field::<SolveMethod>(&entries, "solver_method")?.unwrap_or(defaults.method),
            tol: field(&entries, "solver_tol")?.unwrap_or(defaults.tol),
            max_iter: field(&entries, "solver_max_iter")?.unwrap_or(defaults.max_iter),
            fd_eps: field(&entries, "solver_fd_eps")?.unwrap_or(defaults.fd_eps),
        };

        let wave = resolve_wave(problem, &entries)?;
        let cfg = RunConfig {
            problem,
            scheme,
            length,
            n: field(&entries, "N")?.expect("checked above"),
            dt: field(&entries, "dt")?.expect("checked above"),
            tend: field(&entries, "tend")?.expect("checked above"),
            out: get("out").map(PathBuf::from),
            record_every: field(&entries, "record_every")?.unwrap_or(DEFAULT_RECORD_EVERY),
            seed: field(&entries, "seed")?.unwrap_or(0),
            solver,
            wave,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.problem.allows(self.scheme) {
            return Err(invalid("scheme", format!("'{}' is not available for problem '{}'", self.scheme, self.problem)));
        }
        match (self.problem.is_periodic(), self.length) {
            (false, None) => return Err(ConfigError::Missing(vec!["L".into()])),
            (false, Some(l)) if !(l > 0.0 && l.is_finite()) => {
                return Err(invalid("L", format!("must be positive, got {l}")))
            }
            (true, Some(_)) => return Err(invalid("L", "not allowed for periodic problems".into())),
            _ => {}
        }
        if self.n < 4 {
            return Err(invalid("N", format!("must be at least 4, got {}", self.n)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.tend >= 0.0 && self.tend.is_finite()) {
            return Err(invalid("tend", format!("must be non-negative, got {}", self.tend)));
        }
        let steps = (self.tend / self.dt).round();
        if steps > MAX_STEPS as f64 {
            return Err(invalid("tend", format!("tend / dt exceeds {MAX_STEPS} steps")));
        }
        if (steps * self.dt - self.tend).abs() > 1e-9 * self.tend.max(1.0) {
            return Err(invalid("tend", format!("{} is not a whole number of steps of {}", self.tend, self.dt)));
        }
        if self.record_every < 1 {
            return Err(invalid("record_every", "must be at least 1".into()));
        }
        if (self.record_every as f64) * self.dt < 1e-6 {
            return Err(invalid("record_every", "snapshot spacing below the 1e-6 time stamp resolution".into()));
        }
        self.solver.validate().map_err(|msg| invalid("solver", msg))?;
        match (self.problem.is_periodic(), &self.wave) {
            (true, Some(w)) => w.validate().map_err(|e| invalid("wave", e.to_string()))?,
            (true, None) => return Err(invalid("wave", "periodic problems need wave parameters".into())),
            (false, Some(_)) => return Err(invalid("wave", "the hs problem takes no wave parameters".into())),
            (false, None) => {}
        }
        Ok(())
    }

    /// `key=value` lines that [`RunConfig::parse`] maps back to `self`.
    pub fn to_manifest(&self) -> String {
        let mut lines = vec![
            format!("version={}", env!("CARGO_PKG_VERSION")),
            format!("problem={}", self.problem),
            format!("scheme={}", self.scheme),
        ];
        if let Some(l) = self.length {
            lines.push(format!("L={l:?}"));
        }
        lines.push(format!("N={}", self.n));
        lines.push(format!("dt={:?}", self.dt));
        lines.push(format!("tend={:?}", self.tend));
        if let Some(out) = &self.out {
            lines.push(format!("out={}", out.display()));
        }
        lines.push(format!("record_every={}", self.record_every));
        lines.push(format!("seed={}", self.seed));
        lines.push(format!("solver_method={}", self.solver.method.as_str()));
        lines.push(format!("solver_tol={:?}", self.solver.tol));
        lines.push(format!("solver_max_iter={}", self.solver.max_iter));
        lines.push(format!("solver_fd_eps={:?}", self.solver.fd_eps));
        match self.wave {
            Some(WaveSpec::Mhs { omega, min, max, speed }) => {
                lines.extend([format!("omega={omega:?}"), format!("m={min:?}"), format!("M={max:?}"), format!("c={speed:?}")]);
            }
            Some(WaveSpec::Hs2 { b, min, max, speed, kappa }) => {
                lines.extend([
                    format!("b={b:?}"),
                    format!("z={min:?}"),
                    format!("Z={max:?}"),
                    format!("c={speed:?}"),
                    format!("kappa={kappa:?}"),
                ]);
            }
            None => {}
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}

fn invalid(field: &str, msg: String) -> ConfigError {
    ConfigError::Invalid { field: field.into(), msg }
}

/// `key -> (line, value)`; line 0 marks a command-line override.
fn read_entries(text: &str) -> Result<BTreeMap<String, (usize, String)>, ConfigError> {
    let mut entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line, msg: format!("expected key=value, got '{content}'") })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if entries.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(ConfigError::Parse { line, msg: format!("duplicate key '{key}'") });
        }
    }
    Ok(entries)
}

fn field<T: FromStr>(entries: &BTreeMap<String, (usize, String)>, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    match entries.get(key) {
        None => Ok(None),
        Some((line, v)) => v.parse().map(Some).map_err(|e: T::Err| {
            let msg = format!("{key}: cannot parse '{v}': {e}");
            if *line == 0 {
                invalid(key, msg)
            } else {
                ConfigError::Parse { line: *line, msg }
            }
        }),
    }
}

fn resolve_wave(problem: Problem, entries: &BTreeMap<String, (usize, String)>) -> Result<Option<WaveSpec>, ConfigError> {
    let foreign: &[&str] = match problem {
        Problem::Hs => &["omega", "m", "M", "c", "b", "z", "Z", "kappa"],
        Problem::Mhs => HS2_KEYS,
        Problem::Hs2 => MHS_KEYS,
    };
    if let Some(k) = foreign.iter().find(|k| entries.contains_key(**k)) {
        return Err(invalid(k, format!("not a parameter of problem '{problem}'")));
    }
    Ok(match problem.default_wave() {
        Some(WaveSpec::Mhs { omega, min, max, speed }) => Some(WaveSpec::Mhs {
            omega: field(entries, "omega")?.unwrap_or(omega),
            min: field(entries, "m")?.unwrap_or(min),
            max: field(entries, "M")?.unwrap_or(max),
            speed: field(entries, "c")?.unwrap_or(speed),
        }),
        Some(WaveSpec::Hs2 { b, min, max, speed, kappa }) => Some(WaveSpec::Hs2 {
            b: field(entries, "b")?.unwrap_or(b),
            min: field(entries, "z")?.unwrap_or(min),
            max: field(entries, "Z")?.unwrap_or(max),
            speed: field(entries, "c")?.unwrap_or(speed),
            kappa: field(entries, "kappa")?.unwrap_or(kappa),
        }),
        None => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_hs_config() {
        let cfg = RunConfig::parse("problem=hs\nscheme=eb1\nL=6\nN=201\ndt=0.01\ntend=0.5\n").unwrap();
        assert_eq!(cfg.problem, Problem::Hs);
        assert_eq!(cfg.scheme, Scheme::Eb1);
        assert_eq!(cfg.length, Some(6.0));
        assert_eq!(cfg.steps(), 50);
        assert_eq!(cfg.solver, SolveConfig::default());
        assert_eq!(cfg.wave, None);
    }

    #[test]
    fn periodic_scheme_on_half_line_rejected() {
        let err = RunConfig::parse("scheme=ms\nproblem=hs\nL=6\nN=64\ndt=0.01\ntend=0.1").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref field, .. } if field == "scheme"), "{err}");
    }

    #[test]
    fn empty_file_lists_missing() {
        match RunConfig::parse("") {
            Err(ConfigError::Missing(keys)) => assert_eq!(keys, ["problem", "scheme", "N", "dt", "tend"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_has_line_number() {
        let err = RunConfig::parse("problem=hs\n\n# comment\nfoo=1\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 4, ref key } if key == "foo"));
        let err = RunConfig::parse("problem=hs\nN=abc\nscheme=eb1\nL=6\ndt=0.01\ntend=1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
        assert!(matches!(RunConfig::parse("problem hs"), Err(ConfigError::Parse { line: 1, .. })));
    }

    #[test]
    fn wave_defaults_and_foreign_keys() {
        let cfg = RunConfig::parse("problem=mhs\nscheme=ms\nN=256\ndt=0.02\ntend=3.5\n").unwrap();
        assert_eq!(cfg.wave, Problem::Mhs.default_wave());
        assert!(RunConfig::parse("problem=mhs\nscheme=ms\nN=256\ndt=0.02\ntend=3.5\nb=2\n").is_err());
        assert!(RunConfig::parse("problem=mhs\nscheme=ms\nN=256\ndt=0.02\ntend=3.5\nL=3\n").is_err());
        assert!(RunConfig::parse("problem=hs2\nscheme=h1\nN=64\ndt=0.1\ntend=1\nkappa=-1\n").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = RunConfig::parse(
            "problem=hs2\nscheme=h1\nN=512\ndt=0.1\ntend=1\nsolver_tol=1e-13\nrecord_every=3\nseed=7\nout=/tmp/x\nc=2.5\n",
        )
        .unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_manifest()).unwrap(), cfg);
    }

    #[test]
    fn tend_must_be_whole_steps() {
        assert!(RunConfig::parse("problem=hs\nscheme=h1\nL=6\nN=20\ndt=0.03\ntend=0.1\n").is_err());
        let zero = RunConfig::parse("problem=hs\nscheme=h1\nL=6\nN=20\ndt=0.03\ntend=0\n").unwrap();
        assert_eq!(zero.steps(), 0);
    }
}
