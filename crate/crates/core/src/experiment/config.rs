//! JSON experiment configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::is_prime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Expander,
    Incidence,
    Extractor,
    Sarkozy,
    Multtable,
    Weil,
    Wellspaced,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Expander,
        Kind::Incidence,
        Kind::Extractor,
        Kind::Sarkozy,
        Kind::Multtable,
        Kind::Weil,
        Kind::Wellspaced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Expander => "expander",
            Kind::Incidence => "incidence",
            Kind::Extractor => "extractor",
            Kind::Sarkozy => "sarkozy",
            Kind::Multtable => "multtable",
            Kind::Weil => "weil",
            Kind::Wellspaced => "wellspaced",
        }
    }
}

/// Either an explicit list or every prime in `[from, to]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrimeSelection {
    List(Vec<u64>),
    Range(PrimeRange),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeRange {
    pub from: u64,
    pub to: u64,
}

impl PrimeSelection {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            PrimeSelection::List(v) => v.clone(),
            PrimeSelection::Range(r) => (r.from..=r.to).filter(|&n| is_prime(n)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default)]
    pub format: Format,
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_out_dir(),
            format: Format::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpanderParams {
    /// Map under study, in `x, y`.
    #[serde(default = "default_expander_map")]
    pub map: String,
    /// Random-set expansion over `primes`.
    #[serde(default = "default_true")]
    pub samples: bool,
    /// Second map run on the same random sets.
    #[serde(default)]
    pub compare_with: Option<String>,
    /// Exhaustive small-field checks: Cauchy-Davenport and the
    /// Cauchy-Schwarz chain.
    #[serde(default)]
    pub exhaustive: Option<ExhaustiveParams>,
    /// Non-expansion constructions.
    #[serde(default)]
    pub witnesses: Option<WitnessParams>,
}

fn default_expander_map() -> String {
    "x^2 + x*y".into()
}

impl Default for ExpanderParams {
    fn default() -> Self {
        ExpanderParams {
            map: default_expander_map(),
            samples: true,
            compare_with: None,
            exhaustive: None,
            witnesses: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExhaustiveParams {
    /// Prime for the all-pairs sumset check.
    #[serde(default)]
    pub sumset_prime: Option<u64>,
    #[serde(default)]
    pub chain_primes: Vec<u64>,
    #[serde(default = "default_three")]
    pub chain_max_size: usize,
    #[serde(default)]
    pub chain_maps: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessParams {
    pub primes: Vec<u64>,
    pub alpha: f64,
    /// `(f, g)` pairs for the separable construction.
    pub separable: Vec<(String, String)>,
    pub bourgain_k: Vec<u32>,
    pub bourgain_u: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceParams {
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    /// Random instances per `(p, d)`.
    #[serde(default = "default_instances")]
    pub instances: u64,
    #[serde(default = "default_max_objects")]
    pub max_points: u64,
    #[serde(default = "default_max_objects")]
    pub max_planes: u64,
    /// Add all points against all `y = m x + b` lines for each `d = 2` prime.
    #[serde(default = "default_true")]
    pub full_grid: bool,
    /// Line-family sizes for `2 <= |A| <= max`.
    #[serde(default)]
    pub line_family: Option<LineFamilyParams>,
}

fn default_dims() -> Vec<usize> {
    vec![2, 3]
}

fn default_instances() -> u64 {
    1000
}

fn default_max_objects() -> u64 {
    40
}

fn default_true() -> bool {
    true
}

impl Default for IncidenceParams {
    fn default() -> Self {
        IncidenceParams {
            dims: default_dims(),
            instances: default_instances(),
            max_points: default_max_objects(),
            max_planes: default_max_objects(),
            full_grid: true,
            line_family: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineFamilyParams {
    pub primes: Vec<u64>,
    pub max_size: usize,
    /// Random sets per `(p, size)`.
    pub sets_per_size: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractorParams {
    #[serde(default = "default_a")]
    pub a: String,
    #[serde(default = "default_a")]
    pub b: String,
    #[serde(default = "default_g")]
    pub g: String,
    /// `h(y, z)`
    #[serde(default = "default_h")]
    pub h: String,
    #[serde(default = "default_true")]
    pub scan: bool,
    /// Spectrum identities on random histograms at these primes.
    #[serde(default)]
    pub spectrum_primes: Vec<u64>,
    #[serde(default)]
    pub moments: Option<MomentParams>,
}

fn default_a() -> String {
    "z".into()
}

fn default_g() -> String {
    "y^2".into()
}

fn default_h() -> String {
    "0".into()
}

impl Default for ExtractorParams {
    fn default() -> Self {
        ExtractorParams {
            a: default_a(),
            b: default_a(),
            g: default_g(),
            h: default_h(),
            scan: true,
            spectrum_primes: Vec::new(),
            moments: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentParams {
    pub primes: Vec<u64>,
    pub max_size: usize,
    /// Polynomials in `y` for the `nu` system.
    pub g_pool: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SarkozyParams {
    /// Exhaustive agreement of both counting routes on all sets up to
    /// `exhaustive_max_size` at these primes.
    #[serde(default)]
    pub exhaustive_primes: Vec<u64>,
    #[serde(default = "default_three")]
    pub exhaustive_max_size: usize,
    /// Random agreement instances per prime in `primes`.
    #[serde(default)]
    pub random_instances: u64,
    /// Largest set in the random agreement instances.
    #[serde(default = "default_random_max_size")]
    pub random_max_size: u64,
    /// Draws with `|A||B||C||D| > p^3` per prime in `primes`.
    #[serde(default)]
    pub sweep_trials: u64,
    /// Restricted-size search for the map below.
    #[serde(default)]
    pub essential: Option<EssentialParams>,
}

fn default_random_max_size() -> u64 {
    16
}

fn default_three() -> usize {
    3
}

impl Default for SarkozyParams {
    fn default() -> Self {
        SarkozyParams {
            exhaustive_primes: Vec::new(),
            exhaustive_max_size: 3,
            random_instances: 0,
            random_max_size: default_random_max_size(),
            sweep_trials: 100,
            essential: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EssentialParams {
    pub map: String,
    pub delta_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultTableParams {
    /// Every `n` in `1..=n_max`.
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    /// Also enumerate products directly (quadratic memory).
    #[serde(default = "default_true")]
    pub direct: bool,
}

fn default_n_max() -> u64 {
    64
}

impl Default for MultTableParams {
    fn default() -> Self {
        MultTableParams {
            n_max: default_n_max(),
            direct: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeilParams {
    /// Empty means the built-in pool of twenty polynomials.
    #[serde(default)]
    pub pool: Vec<String>,
    /// Interval-preimage sweep over every `(u, L)`.
    #[serde(default)]
    pub interval: Option<IntervalParams>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalParams {
    pub primes: Vec<u64>,
    pub polys: Vec<String>,
}

impl Default for WeilParams {
    fn default() -> Self {
        WeilParams {
            pool: Vec::new(),
            interval: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSpacedParams {
    /// Three-variable map.
    #[serde(default = "default_wellspaced_map")]
    pub map: String,
    #[serde(default = "default_instances")]
    pub instances: u64,
}

fn default_wellspaced_map() -> String {
    "z*x*y + z*x^2*y^2".into()
}

impl Default for WellSpacedParams {
    fn default() -> Self {
        WellSpacedParams {
            map: default_wellspaced_map(),
            instances: default_instances(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub primes: PrimeSelection,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub override_budget: bool,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expander: Option<ExpanderParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incidence: Option<IncidenceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extractor: Option<ExtractorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sarkozy: Option<SarkozyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multtable: Option<MultTableParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weil: Option<WeilParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wellspaced: Option<WellSpacedParams>,
}

fn default_trials() -> u64 {
    1
}

fn default_alphas() -> Vec<f64> {
    vec![0.5]
}

impl ExperimentConfig {
    /// A small default configuration for `kind`.
    pub fn default_for(kind: Kind) -> Self {
        let primes = match kind {
            Kind::Multtable => vec![],
            Kind::Weil => vec![11, 101],
            Kind::Incidence => vec![5, 7],
            Kind::Sarkozy => vec![31, 101],
            _ => vec![101, 499],
        };
        ExperimentConfig {
            kind,
            seed: 0,
            trials: default_trials(),
            primes: PrimeSelection::List(primes),
            alphas: default_alphas(),
            override_budget: false,
            output: OutputConfig::default(),
            expander: None,
            incidence: None,
            extractor: None,
            sarkozy: None,
            multtable: None,
            weil: None,
            wellspaced: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Field-level diagnostics for everything the runner cannot accept.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let primes = self.primes.resolve();
        if primes.is_empty() && self.kind != Kind::Multtable {
            errs.push("primes: no primes selected".to_string());
        }
        check_primes("primes", &primes, &mut errs);
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            errs.push("primes: must be strictly ascending".into());
        }
        if self.trials == 0 {
            errs.push("trials: must be at least 1".into());
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if !(*a > 0.0 && *a <= 1.0) {
                errs.push(format!("alphas[{i}]: {a} outside (0, 1]"));
            }
        }
        let blocks = [
            (Kind::Expander, self.expander.is_some()),
            (Kind::Incidence, self.incidence.is_some()),
            (Kind::Extractor, self.extractor.is_some()),
            (Kind::Sarkozy, self.sarkozy.is_some()),
            (Kind::Multtable, self.multtable.is_some()),
            (Kind::Weil, self.weil.is_some()),
            (Kind::Wellspaced, self.wellspaced.is_some()),
        ];
        for (kind, present) in blocks {
            if present && kind != self.kind {
                errs.push(format!(
                    "{}: parameters given for a {} experiment",
                    kind.name(),
                    self.kind.name()
                ));
            }
        }
        match self.kind {
            Kind::Expander => {
                let p = self.expander.clone().unwrap_or_default();
                if self.alphas.len() != 1 {
                    errs.push("alphas: expander experiments take exactly one alpha".into());
                }
                if let Some(w) = &p.witnesses {
                    check_primes("expander.witnesses.primes", &w.primes, &mut errs);
                    if !(w.alpha > 0.0 && w.alpha <= 1.0) {
                        errs.push(format!("expander.witnesses.alpha: {} outside (0, 1]", w.alpha));
                    }
                    if w.bourgain_k.iter().any(|&k| k < 2) {
                        errs.push("expander.witnesses.bourgain_k: every k must be at least 2".into());
                    }
                }
                if let Some(e) = &p.exhaustive {
                    let q: Vec<u64> = e.sumset_prime.into_iter().collect();
                    check_primes("expander.exhaustive.sumset_prime", &q, &mut errs);
                    if q.iter().any(|&q| q > 13) {
                        errs.push("expander.exhaustive.sumset_prime: at most 13".into());
                    }
                    check_primes("expander.exhaustive.chain_primes", &e.chain_primes, &mut errs);
                    if e.chain_primes.iter().any(|&q| q > 13) {
                        errs.push("expander.exhaustive.chain_primes: at most 13".into());
                    }
                }
            }
            Kind::Incidence => {
                let p = self.incidence.clone().unwrap_or_default();
                if p.dims.is_empty() || p.dims.iter().any(|&d| !(2..=4).contains(&d)) {
                    errs.push("incidence.dims: each dimension must be 2, 3 or 4".into());
                }
                if let Some(l) = &p.line_family {
                    check_primes("incidence.line_family.primes", &l.primes, &mut errs);
                    if l.max_size < 2 {
                        errs.push("incidence.line_family.max_size: must be at least 2".into());
                    }
                }
            }
            Kind::Extractor => {
                let p = self.extractor.clone().unwrap_or_default();
                check_primes("extractor.spectrum_primes", &p.spectrum_primes, &mut errs);
                if let Some(m) = &p.moments {
                    check_primes("extractor.moments.primes", &m.primes, &mut errs);
                    if m.max_size == 0 {
                        errs.push("extractor.moments.max_size: must be at least 1".into());
                    }
                    if m.primes.iter().any(|&q| q > 13) {
                        errs.push("extractor.moments.primes: at most 13".into());
                    }
                }
                if primes.contains(&2) {
                    errs.push("primes: sign sums need odd primes".into());
                }
            }
            Kind::Sarkozy => {
                let p = self.sarkozy.clone().unwrap_or_default();
                check_primes("sarkozy.exhaustive_primes", &p.exhaustive_primes, &mut errs);
                if p.exhaustive_primes.iter().any(|&q| q > 7) {
                    errs.push("sarkozy.exhaustive_primes: at most 7".into());
                }
                if p.random_max_size == 0 {
                    errs.push("sarkozy.random_max_size: must be at least 1".into());
                }
            }
            Kind::Multtable => {
                let p = self.multtable.clone().unwrap_or_default();
                if p.n_max == 0 {
                    errs.push("multtable.n_max: must be at least 1".into());
                }
                if p.direct && p.n_max > 4096 {
                    errs.push("multtable.n_max: direct enumeration is limited to 4096".into());
                }
            }
            Kind::Weil => {
                let p = self.weil.clone().unwrap_or_default();
                if let Some(i) = &p.interval {
                    check_primes("weil.interval.primes", &i.primes, &mut errs);
                }
            }
            Kind::Wellspaced => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(errs))
        }
    }
}

fn check_primes(field: &str, primes: &[u64], errs: &mut Vec<String>) {
    for (i, &p) in primes.iter().enumerate() {
        if !is_prime(p) || p < 3 {
            errs.push(format!("{field}[{i}]: {p} is not an odd prime"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses() {
        let cfg = ExperimentConfig::from_json(r#"{"kind": "weil", "primes": [11]}"#).unwrap();
        assert_eq!(cfg.trials, 1);
        assert_eq!(cfg.output.format, Format::Csv);
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn range_selection() {
        let cfg =
            ExperimentConfig::from_json(r#"{"kind": "weil", "primes": {"from": 10, "to": 30}}"#).unwrap();
        assert_eq!(cfg.primes.resolve(), vec![11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn rejections() {
        let bad = |s: &str| match ExperimentConfig::from_json(s) {
            Err(Error::ConfigInvalid(v)) => v,
            other => panic!("expected ConfigInvalid, got {other:?}"),
        };
        assert!(bad(r#"{"kind": "weil", "primes": []}"#)[0].starts_with("primes"));
        assert!(bad(r#"{"kind": "weil", "primes": [11], "colour": 1}"#)[0].contains("colour"));
        assert!(bad(r#"{"kind": "weil", "primes": [12]}"#)[0].contains("primes[0]"));
        let v = bad(r#"{"kind": "weil", "primes": [11], "trials": 0, "alphas": [2.0]}"#);
        assert_eq!(v.len(), 2);
        assert!(bad(r#"{"kind": "weil", "primes": [11], "multtable": {}}"#)[0].starts_with("multtable"));
    }
}
