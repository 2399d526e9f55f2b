//! Line-oriented experiment configuration.
//!
//! ```text
//! # global keys
//! L = 1024
//! method = both                 # biorthogonal | normalized | both
//! clock = duration              # duration | rate
//! exclusion_radius = 1e-9       # EP nudge radius in momentum
//! mirror = true                 # half-zone evaluation where n_ex(k) = n_ex(-k)
//! workers = 4
//! seed = 1
//! out = results
//!
//! [tau]
//! min = 1
//! max = 1e4
//! per_decade = 8                # or: values = 1, 10, 100
//!
//! [integrator]                  # any IntegratorConfig field
//! rel_tol = 1e-9
//!
//! [protocol]                    # repeatable
//! kind = pt_symmetric           # pt_symmetric | non_hermitian | through_broken
//! eps_i = 0.1, 0.2              # or v_i (pt_symmetric) / u_i (non_hermitian)
//! u = 0.5                       # pt_symmetric only
//! end_offset = auto             # or a time
//!
//! [trajectory]
//! k = 2.9, 3.0
//! stride = 16
//! tau_q = 1000                  # default: every sweep τ_Q (freeze: the largest)
//! ```
//!
//! Blank lines and `#` comments are ignored. Every key may appear once per
//! section; unknown keys and sections are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use biokz::{EndOffset, IntegratorConfig, Method, QuenchProtocol, RampClock};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Which probability definitions a sweep evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSelection {
    Biorthogonal,
    Normalized,
    Both,
}

impl MethodSelection {
    pub fn methods(&self) -> &'static [Method] {
        match self {
            MethodSelection::Biorthogonal => &[Method::Biorthogonal],
            MethodSelection::Normalized => &[Method::Normalized],
            MethodSelection::Both => &[Method::Biorthogonal, Method::Normalized],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodSelection::Biorthogonal => "biorthogonal",
            MethodSelection::Normalized => "normalized",
            MethodSelection::Both => "both",
        }
    }
}

impl std::str::FromStr for MethodSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "biorthogonal" => Ok(MethodSelection::Biorthogonal),
            "normalized" => Ok(MethodSelection::Normalized),
            "both" => Ok(MethodSelection::Both),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolKind {
    PtSymmetric,
    NonHermitian,
    ThroughBroken,
}

/// One `[protocol]` section; expands to one protocol instance per `ε_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub eps_i: Vec<f64>,
    pub u: f64,
    pub end_offset: EndOffset,
}

impl ProtocolSpec {
    pub fn instances(&self) -> Vec<Instance> {
        match self.kind {
            ProtocolKind::ThroughBroken => vec![Instance::new(QuenchProtocol::through_broken())],
            ProtocolKind::PtSymmetric => self
                .eps_i
                .iter()
                .map(|&e| Instance {
                    eps_i: e,
                    protocol: QuenchProtocol::pt_symmetric_eps(e, self.u).with_end_offset(self.end_offset),
                })
                .collect(),
            ProtocolKind::NonHermitian => self
                .eps_i
                .iter()
                .map(|&e| Instance {
                    eps_i: e,
                    protocol: QuenchProtocol::non_hermitian_eps(e).with_end_offset(self.end_offset),
                })
                .collect(),
        }
    }
}

/// A protocol together with the ε_i it was configured with. Keeping the
/// configured value avoids the rounding of recomputing `v_i/v_c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Instance {
    pub eps_i: f64,
    pub protocol: QuenchProtocol,
}

impl Instance {
    pub fn new(protocol: QuenchProtocol) -> Self {
        Instance {
            eps_i: protocol.eps_i(),
            protocol,
        }
    }
}

/// Label used in the `protocol` CSV column. Protocol I with a gain/loss other
/// than the default 1/2 carries it in the label.
pub fn protocol_label(p: &QuenchProtocol) -> String {
    match *p {
        QuenchProtocol::PtSymmetricV { u, .. } if u != 0.5 => format!("pt_symmetric_u{u}"),
        _ => p.name().to_string(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySpec {
    pub k: Vec<f64>,
    pub stride: usize,
    /// Quench times for trajectories; empty means the command's default.
    pub tau_q: Vec<f64>,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        TrajectorySpec {
            k: Vec::new(),
            stride: 16,
            tau_q: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub protocols: Vec<ProtocolSpec>,
    pub len: usize,
    pub tau_q: Vec<f64>,
    pub integrator: IntegratorConfig,
    pub method: MethodSelection,
    pub clock: RampClock,
    pub exclusion_radius: f64,
    pub mirror: bool,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    /// Seeds synthetic fixtures only; the physics is deterministic.
    pub seed: u64,
    pub trajectory: TrajectorySpec,
}

impl ExperimentConfig {
    /// A single-protocol configuration with library defaults.
    pub fn new(protocol: ProtocolSpec, len: usize, tau_q: Vec<f64>) -> Self {
        ExperimentConfig {
            protocols: vec![protocol],
            len,
            tau_q,
            integrator: IntegratorConfig::default(),
            method: MethodSelection::Biorthogonal,
            clock: RampClock::Duration,
            exclusion_radius: DEFAULT_EXCLUSION_RADIUS,
            mirror: true,
            out_dir: None,
            workers: None,
            seed: 0,
            trajectory: TrajectorySpec::default(),
        }
    }

    pub fn instances(&self) -> Vec<Instance> {
        self.protocols.iter().flat_map(|p| p.instances()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(CliError::Invalid("at least one [protocol] section is required".into()));
        }
        if self.len < 4 {
            return Err(CliError::Invalid("L must be at least 4".into()));
        }
        if self.tau_q.is_empty() || self.tau_q.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(CliError::Invalid("tau_q list must be nonempty and positive".into()));
        }
        if !(self.exclusion_radius >= 0.0 && self.exclusion_radius.is_finite()) {
            return Err(CliError::Invalid("exclusion_radius must be >= 0".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Invalid("workers must be positive".into()));
        }
        self.integrator
            .validate()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        for inst in self.instances() {
            let p = inst.protocol;
            p.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
            if matches!(p, QuenchProtocol::PtSymmetricV { .. } | QuenchProtocol::NonHermitianU { .. })
                && !(inst.eps_i > 0.0)
            {
                return Err(CliError::Invalid("eps_i must be positive".into()));
            }
        }
        Ok(())
    }

    /// Canonical text of every setting that affects numerical results.
    /// Output location and worker count are excluded.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let i = &self.integrator;
        let _ = writeln!(s, "L={}", self.len);
        let _ = writeln!(s, "tau_q={:?}", self.tau_q);
        let _ = writeln!(s, "method={}", self.method.name());
        let _ = writeln!(s, "clock={}", self.clock.name());
        let _ = writeln!(s, "exclusion_radius={:?}", self.exclusion_radius);
        let _ = writeln!(s, "mirror={}", self.mirror);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(
            s,
            "integrator={:?},{:?},{:?},{:?},{},{:?},{:?},{}",
            i.rel_tol,
            i.abs_tol,
            i.max_step,
            i.min_step,
            i.steps_per_unit_time_min,
            i.ep_refine_factor,
            i.ep_threshold,
            i.renormalize
        );
        for inst in self.instances() {
            let _ = writeln!(s, "protocol={:?},{:?}", inst.eps_i, inst.protocol);
        }
        let t = &self.trajectory;
        let _ = writeln!(s, "trajectory={:?},{},{:?}", t.k, t.stride, t.tau_q);
        s
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Nudge radius applied by default: moves grid points that sit on an
/// end-of-ramp EP momentum, and nothing else.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 1e-9;

/// `10^(log10(min) + j/per_decade)` for `j = 0, 1, …` up to `max`.
pub fn log_spaced(min: f64, max: f64, per_decade: u32) -> Vec<f64> {
    let a = min.log10();
    let b = max.log10();
    let n = ((b - a) * per_decade as f64 + 1e-9).floor() as i64;
    (0..=n.max(0))
        .map(|j| 10f64.powf(a + j as f64 / per_decade as f64))
        .collect()
}

pub fn load(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)
}

#[derive(Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn finish(self, name: &str) -> Result<()> {
        match self.entries.into_iter().next() {
            Some((key, (line, _))) => Err(CliError::config(line, format!("unknown key `{key}` in {name}"))),
            None => Ok(()),
        }
    }
}

fn value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::config(line, format!("invalid value `{raw}` for `{key}`")))
}

fn list(line: usize, key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',').map(|item| value(line, key, item)).collect()
}

fn flag(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::config(line, format!("`{key}` expects true or false"))),
    }
}

pub fn parse(text: &str) -> Result<ExperimentConfig> {
    let mut global = Section::default();
    let mut tau: Option<Section> = None;
    let mut integrator: Option<Section> = None;
    let mut trajectory: Option<Section> = None;
    let mut protocols: Vec<Section> = Vec::new();

    #[derive(Clone, Copy)]
    enum Current {
        Global,
        Tau,
        Integrator,
        Trajectory,
        Protocol,
    }
    let mut current = Current::Global;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::config(line, "unterminated section header"))?
                .trim();
            let fresh = Section {
                line,
                ..Section::default()
            };
            let once = |slot: &mut Option<Section>, fresh: Section| {
                if slot.is_some() {
                    return Err(CliError::config(line, format!("duplicate section [{name}]")));
                }
                *slot = Some(fresh);
                Ok(())
            };
            current = match name {
                "tau" => {
                    once(&mut tau, fresh)?;
                    Current::Tau
                }
                "integrator" => {
                    once(&mut integrator, fresh)?;
                    Current::Integrator
                }
                "trajectory" => {
                    once(&mut trajectory, fresh)?;
                    Current::Trajectory
                }
                "protocol" => {
                    protocols.push(fresh);
                    Current::Protocol
                }
                other => return Err(CliError::config(line, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, val) = content
            .split_once('=')
            .ok_or_else(|| CliError::config(line, "expected `key = value`"))?;
        let key = key.trim();
        let val = val.trim();
        if key.is_empty() {
            return Err(CliError::config(line, "empty key"));
        }
        let section = match current {
            Current::Global => &mut global,
            Current::Tau => tau.as_mut().unwrap(),
            Current::Integrator => integrator.as_mut().unwrap(),
            Current::Trajectory => trajectory.as_mut().unwrap(),
            Current::Protocol => protocols.last_mut().unwrap(),
        };
        if section
            .entries
            .insert(key.to_string(), (line, val.to_string()))
            .is_some()
        {
            return Err(CliError::config(line, format!("duplicate key `{key}`")));
        }
    }

    let mut cfg = ExperimentConfig::new(
        ProtocolSpec {
            kind: ProtocolKind::ThroughBroken,
            eps_i: Vec::new(),
            u: 0.5,
            end_offset: EndOffset::Auto,
        },
        1024,
        log_spaced(1.0, 1e4, 8),
    );
    cfg.protocols.clear();

    if let Some((l, v)) = global.take("L") {
        cfg.len = value(l, "L", &v)?;
    }
    if let Some((l, v)) = global.take("method") {
        cfg.method = v.parse().map_err(|e: String| CliError::config(l, e))?;
    }
    if let Some((l, v)) = global.take("clock") {
        cfg.clock = match v.as_str() {
            "duration" => RampClock::Duration,
            "rate" => RampClock::Rate,
            _ => return Err(CliError::config(l, "`clock` expects duration or rate")),
        };
    }
    if let Some((l, v)) = global.take("exclusion_radius") {
        cfg.exclusion_radius = value(l, "exclusion_radius", &v)?;
    }
    if let Some((l, v)) = global.take("mirror") {
        cfg.mirror = flag(l, "mirror", &v)?;
    }
    if let Some((l, v)) = global.take("workers") {
        cfg.workers = Some(value(l, "workers", &v)?);
    }
    if let Some((l, v)) = global.take("seed") {
        cfg.seed = value(l, "seed", &v)?;
    }
    if let Some((_, v)) = global.take("out") {
        cfg.out_dir = Some(PathBuf::from(v));
    }
    global.finish("global section")?;

    if let Some(mut s) = tau {
        if let Some((l, v)) = s.take("values") {
            cfg.tau_q = list(l, "values", &v)?;
            if let Some((l2, _)) = s.take("min").or_else(|| s.take("max")).or_else(|| s.take("per_decade")) {
                return Err(CliError::config(l2, "give either `values` or min/max/per_decade"));
            }
        } else {
            let min = s.take("min");
            let max = s.take("max");
            let ppd = s.take("per_decade");
            let (lo, hi) = match (min, max) {
                (Some((l1, a)), Some((l2, b))) => (value::<f64>(l1, "min", &a)?, value::<f64>(l2, "max", &b)?),
                _ => return Err(CliError::config(s.line, "[tau] needs `values` or both `min` and `max`")),
            };
            let per = match ppd {
                Some((l, v)) => value::<u32>(l, "per_decade", &v)?,
                None => 8,
            };
            if !(lo > 0.0 && hi >= lo && per > 0) {
                return Err(CliError::config(s.line, "[tau] needs 0 < min <= max and per_decade > 0"));
            }
            cfg.tau_q = log_spaced(lo, hi, per);
        }
        s.finish("[tau]")?;
    }

    if let Some(mut s) = integrator {
        let i = &mut cfg.integrator;
        for (key, slot) in [
            ("rel_tol", &mut i.rel_tol),
            ("abs_tol", &mut i.abs_tol),
            ("max_step", &mut i.max_step),
            ("min_step", &mut i.min_step),
            ("ep_refine_factor", &mut i.ep_refine_factor),
            ("ep_threshold", &mut i.ep_threshold),
        ] {
            if let Some((l, v)) = s.take(key) {
                *slot = value(l, key, &v)?;
            }
        }
        if let Some((l, v)) = s.take("steps_per_unit_time_min") {
            i.steps_per_unit_time_min = value(l, "steps_per_unit_time_min", &v)?;
        }
        if let Some((l, v)) = s.take("renormalize") {
            i.renormalize = flag(l, "renormalize", &v)?;
        }
        s.finish("[integrator]")?;
    }

    if let Some(mut s) = trajectory {
        if let Some((l, v)) = s.take("k") {
            cfg.trajectory.k = list(l, "k", &v)?;
        }
        if let Some((l, v)) = s.take("stride") {
            cfg.trajectory.stride = value(l, "stride", &v)?;
        }
        if let Some((l, v)) = s.take("tau_q") {
            cfg.trajectory.tau_q = list(l, "tau_q", &v)?;
        }
        s.finish("[trajectory]")?;
    }

    for mut s in protocols {
        let (kl, kind) = s
            .take("kind")
            .ok_or_else(|| CliError::config(s.line, "[protocol] needs `kind`"))?;
        let kind = match kind.as_str() {
            "pt_symmetric" => ProtocolKind::PtSymmetric,
            "non_hermitian" => ProtocolKind::NonHermitian,
            "through_broken" => ProtocolKind::ThroughBroken,
            other => return Err(CliError::config(kl, format!("unknown protocol kind `{other}`"))),
        };
        let mut spec = ProtocolSpec {
            kind,
            eps_i: Vec::new(),
            u: 0.5,
            end_offset: EndOffset::Auto,
        };
        if kind == ProtocolKind::PtSymmetric {
            if let Some((l, v)) = s.take("u") {
                spec.u = value(l, "u", &v)?;
            }
        }
        if kind != ProtocolKind::ThroughBroken {
            let raw_key = if kind == ProtocolKind::PtSymmetric { "v_i" } else { "u_i" };
            match (s.take("eps_i"), s.take(raw_key)) {
                (Some((l, v)), None) => spec.eps_i = list(l, "eps_i", &v)?,
                (None, Some((l, v))) => {
                    let critical = if kind == ProtocolKind::PtSymmetric { 1.0 + spec.u } else { 1.0 };
                    spec.eps_i = list(l, raw_key, &v)?.into_iter().map(|x| x / critical).collect();
                }
                (Some((l, _)), Some(_)) => {
                    return Err(CliError::config(l, format!("give either `eps_i` or `{raw_key}`")))
                }
                (None, None) => {
                    return Err(CliError::config(s.line, format!("[protocol] needs `eps_i` or `{raw_key}`")))
                }
            }
            if let Some((l, v)) = s.take("end_offset") {
                spec.end_offset = if v == "auto" {
                    EndOffset::Auto
                } else {
                    EndOffset::Fixed(value(l, "end_offset", &v)?)
                };
            }
        }
        s.finish("[protocol]")?;
        cfg.protocols.push(spec);
    }

    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
L = 64
method = both   # evaluate both definitions
[tau]
values = 1, 10
[protocol]
kind = pt_symmetric
eps_i = 0.1, 0.2
[protocol]
kind = through_broken
";

    #[test]
    fn parses_sample() {
        let cfg = parse(SAMPLE).unwrap();
        assert_eq!(cfg.len, 64);
        assert_eq!(cfg.method, MethodSelection::Both);
        assert_eq!(cfg.tau_q, vec![1.0, 10.0]);
        assert_eq!(cfg.instances().len(), 3);
        assert_eq!(cfg.instances()[1].eps_i, 0.2);
    }

    #[test]
    fn log_spacing_hits_decades() {
        let t = log_spaced(1.0, 1e4, 8);
        assert_eq!(t.len(), 33);
        assert_eq!(t[0], 1.0);
        assert!((t[16] - 100.0).abs() < 1e-10 && (t[32] - 1e4).abs() < 1e-8);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = SAMPLE.replace("eps_i = 0.1, 0.2", "eps_i = 0.1, x");
        match parse(&bad) {
            Err(CliError::Config { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        match parse("L = 8\nbogus = 1\n[protocol]\nkind = through_broken\n") {
            Err(CliError::Config { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("L = 8\n"), Err(CliError::Invalid(_))));
        assert!(matches!(parse("[nope]\n"), Err(CliError::Config { line: 1, .. })));
    }

    #[test]
    fn raw_amplitude_converts_to_eps() {
        let cfg = parse("[protocol]\nkind = pt_symmetric\nv_i = 0.5\n").unwrap();
        assert!((cfg.instances()[0].eps_i - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = parse(SAMPLE).unwrap();
        let mut b = a.clone();
        b.out_dir = Some("elsewhere".into());
        b.workers = Some(3);
        assert_eq!(a.hash(), b.hash());
        b.len = 32;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
