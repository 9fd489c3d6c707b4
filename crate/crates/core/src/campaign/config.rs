//! INI parsing into typed cases.

use crate::anyon::Route;
use crate::cones::Point;
use crate::{Error, Result};
use ini::Ini;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    Blip,
    HsNorm,
    Schwinger,
    ImplementerCheck,
    Commutation,
    AuxCommutation,
    SpinStatistics,
    SpecialCases,
    Cones,
    Winding,
}

impl CaseKind {
    pub const ALL: [CaseKind; 10] = [
        CaseKind::Blip,
        CaseKind::HsNorm,
        CaseKind::Schwinger,
        CaseKind::ImplementerCheck,
        CaseKind::Commutation,
        CaseKind::AuxCommutation,
        CaseKind::SpinStatistics,
        CaseKind::SpecialCases,
        CaseKind::Cones,
        CaseKind::Winding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Blip => "blip",
            CaseKind::HsNorm => "hs-norm",
            CaseKind::Schwinger => "schwinger",
            CaseKind::ImplementerCheck => "implementer-check",
            CaseKind::Commutation => "commutation",
            CaseKind::AuxCommutation => "aux-commutation",
            CaseKind::SpinStatistics => "spin-statistics",
            CaseKind::SpecialCases => "special-cases",
            CaseKind::Cones => "cones",
            CaseKind::Winding => "winding",
        }
    }
}

impl FromStr for CaseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown case kind '{s}'")))
    }
}

/// How a convergence sequence over the cutoff list is judged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    /// Final error must not exceed `factor` times the error at the first cutoff.
    pub factor: f64,
    /// Errors below this count as converged and are exempt from the monotonicity test.
    pub floor: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Self { factor: 0.1, floor: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair {
    pub spin: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub epsilon: f64,
    pub positive_lambda: bool,
    pub route: Route,
    pub tail_tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeSide {
    pub support: Vec<Point>,
    pub center: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CaseSpec {
    Blip { epsilon: f64, omega: f64, cutoffs: Vec<usize> },
    HsNorm { epsilon: f64, cutoffs: Vec<usize> },
    Schwinger { pairs: Vec<[f64; 4]>, random: usize, grid: usize, cutoffs: Vec<usize> },
    ImplementerCheck { cutoff: usize, omegas: Vec<f64> },
    Commutation { fields: FieldPair, windings: Vec<i64>, cutoffs: Vec<usize>, schedule: Schedule },
    AuxCommutation { fields: FieldPair, cutoffs: Vec<usize>, schedule: Schedule },
    SpinStatistics { spins: Vec<f64>, omega: f64, epsilon: f64, cutoff: usize, charges: Vec<i64> },
    SpecialCases { epsilon: f64, separation: f64, cutoffs: Vec<usize>, schedule: Schedule },
    Cones {
        spin: f64,
        epsilon: f64,
        cones: [ConeSide; 2],
        windings: Vec<i64>,
        cutoffs: Vec<usize>,
        tail_tolerance: f64,
        schedule: Schedule,
        random_pairs: usize,
    },
    Winding { pairs: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub id: String,
    pub kind: CaseKind,
    pub spec: CaseSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Campaign {
    pub cases: Vec<Case>,
    pub output: PathBuf,
    pub seed: u64,
    /// Record wall-clock times in the CSV; off by default so reruns are byte-identical.
    pub timing: bool,
}

/// String-valued parameters with typed, consuming accessors. Leftover keys are an error.
#[derive(Clone, Debug, Default)]
pub struct Params {
    section: String,
    map: BTreeMap<String, String>,
}

impl Params {
    pub fn new(section: &str, pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        Self { section: section.to_string(), map: pairs.into_iter().collect() }
    }

    fn bad(&self, key: &str, value: &str, what: &str) -> Error {
        Error::Config(format!("[{}] {key} = '{value}': expected {what}", self.section))
    }

    fn take<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(v) => v.trim().parse().map(Some).map_err(|_| self.bad(key, &v, what)),
        }
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.take::<f64>(key, "a number")?.unwrap_or(default))
    }

    pub fn f64_req(&mut self, key: &str) -> Result<f64> {
        self.take::<f64>(key, "a number")?.ok_or_else(|| Error::Config(format!("[{}] missing key '{key}'", self.section)))
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self.take::<usize>(key, "a non-negative integer")?.unwrap_or(default))
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> Result<bool> {
        Ok(self.take::<bool>(key, "true or false")?.unwrap_or(default))
    }

    pub fn list_or<T: FromStr + Clone>(&mut self, key: &str, default: &[T]) -> Result<Vec<T>> {
        match self.map.remove(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| x.trim().parse::<T>().map_err(|_| self.bad(key, &v, "a comma-separated list")))
                .collect(),
        }
    }

    fn polygon(&mut self, key: &str) -> Result<Vec<Point>> {
        let v = self.map.remove(key).ok_or_else(|| Error::Config(format!("[{}] missing key '{key}'", self.section)))?;
        v.split(';')
            .map(|p| {
                let xs: Vec<f64> = p.split_whitespace().map(|x| x.parse()).collect::<std::result::Result<_, _>>().map_err(|_| self.bad(key, &v, "vertices 'x y; x y; ...'"))?;
                match xs[..] {
                    [x, y] => Ok([x, y]),
                    _ => Err(self.bad(key, &v, "vertices 'x y; x y; ...'")),
                }
            })
            .collect()
    }

    fn route_or(&mut self, default: Route) -> Result<Route> {
        match self.map.remove("route") {
            None => Ok(default),
            Some(v) => match v.trim() {
                "fock" => Ok(Route::Fock),
                "quasi-free" => Ok(Route::QuasiFree),
                _ => Err(self.bad("route", &v, "fock or quasi-free")),
            },
        }
    }

    fn schedule(&mut self) -> Result<Schedule> {
        let d = Schedule::default();
        Ok(Schedule { factor: self.f64_or("threshold_factor", d.factor)?, floor: self.f64_or("floor", d.floor)? })
    }

    fn fields(&mut self, default_omega2: f64) -> Result<FieldPair> {
        Ok(FieldPair {
            spin: self.f64_req("spin")?,
            omega1: self.f64_req("omega1")?,
            omega2: self.f64_or("omega2", default_omega2)?,
            epsilon: self.f64_or("epsilon", 1.0)?,
            positive_lambda: self.bool_or("positive_lambda", false)?,
            route: self.route_or(Route::QuasiFree)?,
            tail_tolerance: self.f64_or("tail_tolerance", f64::INFINITY)?,
        })
    }

    pub fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            None => Ok(()),
            Some(k) => Err(Error::Config(format!("[{}] unknown key '{k}'", self.section))),
        }
    }
}

fn nonempty<T>(section: &str, key: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        return Err(Error::Config(format!("[{section}] '{key}' must not be empty")));
    }
    Ok(v)
}

impl Case {
    /// Typed case from a kind and its parameters; every parameter must be consumed.
    pub fn parse(id: &str, kind: CaseKind, mut p: Params) -> Result<Self> {
        let spec = match kind {
            CaseKind::Blip => CaseSpec::Blip {
                epsilon: p.f64_or("epsilon", 0.5)?,
                omega: p.f64_or("omega", 0.0)?,
                cutoffs: nonempty(id, "cutoffs", p.list_or("cutoffs", &[8, 16, 32, 64])?)?,
            },
            CaseKind::HsNorm => {
                let cutoffs = p.list_or("cutoffs", &[8, 16, 32, 64])?;
                if cutoffs.len() < 3 {
                    return Err(Error::Config(format!("[{id}] hs-norm needs at least three cutoffs")));
                }
                CaseSpec::HsNorm { epsilon: p.f64_or("epsilon", 0.5)?, cutoffs }
            }
            CaseKind::Schwinger => {
                let random = p.usize_or("random", 0)?;
                let mut pairs = Vec::new();
                if let Some(sep) = p.take::<f64>("omega", "a number")? {
                    pairs.push([sep, 0.0, p.f64_or("eps1", 0.3)?, p.f64_or("eps2", 0.3)?]);
                } else if p.map.contains_key("omega1") {
                    pairs.push([p.f64_req("omega1")?, p.f64_or("omega2", 0.0)?, p.f64_or("eps1", 0.3)?, p.f64_or("eps2", 0.3)?]);
                }
                if pairs.is_empty() && random == 0 {
                    return Err(Error::Config(format!("[{id}] schwinger needs omega, omega1 or random")));
                }
                CaseSpec::Schwinger {
                    pairs,
                    random,
                    grid: p.usize_or("grid", 4096)?,
                    cutoffs: nonempty(id, "cutoffs", p.list_or("cutoffs", &[8, 16, 32, 64])?)?,
                }
            }
            CaseKind::ImplementerCheck => CaseSpec::ImplementerCheck {
                cutoff: p.usize_or("cutoff", 4)?,
                omegas: p.list_or("omegas", &[0.7, -2.1])?,
            },
            CaseKind::Commutation => CaseSpec::Commutation {
                fields: p.fields(0.0)?,
                windings: p.list_or("windings", &[])?,
                cutoffs: nonempty(id, "cutoffs", p.list_or("cutoffs", &[4, 6, 8, 10])?)?,
                schedule: p.schedule()?,
            },
            CaseKind::AuxCommutation => CaseSpec::AuxCommutation {
                fields: p.fields(0.0)?,
                cutoffs: nonempty(id, "cutoffs", p.list_or("cutoffs", &[4, 6, 8, 10])?)?,
                schedule: p.schedule()?,
            },
            CaseKind::SpinStatistics => CaseSpec::SpinStatistics {
                spins: nonempty(id, "spins", p.list_or("spins", &[0.0, 0.25, -0.5, 0.5])?)?,
                omega: p.f64_or("omega", 0.4)?,
                epsilon: p.f64_or("epsilon", 1.0)?,
                cutoff: p.usize_or("cutoff", 6)?,
                charges: nonempty(id, "charges", p.list_or("charges", &[-2, -1, 0, 1])?)?,
            },
            CaseKind::SpecialCases => CaseSpec::SpecialCases {
                epsilon: p.f64_or("epsilon", 0.3)?,
                separation: p.f64_or("separation", std::f64::consts::PI)?,
                cutoffs: nonempty(id, "cutoffs", p.list_or("cutoffs", &[4, 6, 8, 10])?)?,
                schedule: p.schedule()?,
            },
            CaseKind::Cones => CaseSpec::Cones {
                spin: p.f64_req("spin")?,
                epsilon: p.f64_or("epsilon", 1.0)?,
                cones: [
                    ConeSide { support: p.polygon("support1")?, center: p.f64_req("center1")? },
                    ConeSide { support: p.polygon("support2")?, center: p.f64_req("center2")? },
                ],
                windings: p.list_or("windings", &[])?,
                cutoffs: nonempty(id, "cutoffs", p.list_or("cutoffs", &[4, 6, 8, 10])?)?,
                tail_tolerance: p.f64_or("tail_tolerance", f64::INFINITY)?,
                schedule: p.schedule()?,
                random_pairs: p.usize_or("random_pairs", 0)?,
            },
            CaseKind::Winding => CaseSpec::Winding { pairs: p.usize_or("pairs", 1000)? },
        };
        p.finish()?;
        Ok(Case { id: id.to_string(), kind, spec })
    }
}

impl Campaign {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses INI text; a relative `output` is resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut output = base.join("results");
        let mut seed = 0;
        let mut timing = false;
        let mut cases = Vec::new();
        for (section, props) in ini.iter() {
            let pairs = props.iter().map(|(k, v)| (k.to_string(), v.to_string()));
            match section {
                None if props.is_empty() => {}
                None => return Err(Error::Config("keys outside any section".into())),
                Some("campaign") => {
                    let mut p = Params::new("campaign", pairs);
                    if let Some(o) = p.map.remove("output") {
                        output = base.join(o.trim());
                    }
                    seed = p.take::<u64>("seed", "an unsigned integer")?.unwrap_or(0);
                    timing = p.bool_or("timing", false)?;
                    p.finish()?;
                }
                Some(id) => {
                    if !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                        return Err(Error::Config(format!("case id '{id}' may only use letters, digits, '-' and '_'")));
                    }
                    let mut p = Params::new(id, pairs);
                    let kind: CaseKind = p
                        .map
                        .remove("kind")
                        .ok_or_else(|| Error::Config(format!("[{id}] missing key 'kind'")))?
                        .trim()
                        .parse()?;
                    cases.push(Case::parse(id, kind, p)?);
                }
            }
        }
        if cases.is_empty() {
            return Err(Error::Config("the configuration defines no cases".into()));
        }
        Ok(Campaign { cases, output, seed, timing })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Campaign> {
        Campaign::parse(text, Path::new("/tmp/x"))
    }

    #[test]
    fn parses_cases_and_defaults() {
        let c = parse(
            "[campaign]\noutput = out\nseed = 9\n\n[a]\nkind = blip\nepsilon = 0.4\n\n[b]\nkind = commutation\nspin = 0.25\nomega1 = 2.3\nwindings = -1,0,1\nroute = fock\n",
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.output, Path::new("/tmp/x/out"));
        assert_eq!(c.cases.len(), 2);
        assert_eq!(c.cases[0].spec, CaseSpec::Blip { epsilon: 0.4, omega: 0.0, cutoffs: vec![8, 16, 32, 64] });
        match &c.cases[1].spec {
            CaseSpec::Commutation { fields, windings, .. } => {
                assert_eq!(fields.route, Route::Fock);
                assert_eq!(windings, &vec![-1, 0, 1]);
                assert!(fields.tail_tolerance.is_infinite());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "",
            "[a]\nepsilon = 1\n",
            "[a]\nkind = nope\n",
            "[a]\nkind = blip\nepsilon = x\n",
            "[a]\nkind = blip\nspin = 0.1\n",
            "[a]\nkind = hs-norm\ncutoffs = 8,16\n",
            "[a]\nkind = commutation\nomega1 = 1\n",
            "[a]\nkind = commutation\nspin = 0\nomega1 = 1\nroute = dense\n",
            "[a b]\nkind = blip\n",
            "[campaign]\nseed = -1\n[a]\nkind = blip\n",
            "[a]\nkind = cones\nspin = 0\nsupport1 = 1 2 3\ncenter1 = 0\nsupport2 = 0 0\ncenter2 = 2\n",
            "[a]\nkind = schwinger\n",
            "[a]\nkind = blip\ncutoffs = \n",
        ] {
            assert!(matches!(parse(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn polygons() {
        let c = parse("[a]\nkind = cones\nspin = 0\nsupport1 = 1 2; 3 4;5 6\ncenter1 = 0\nsupport2 = 0 0\ncenter2 = 2\n").unwrap();
        match &c.cases[0].spec {
            CaseSpec::Cones { cones, .. } => {
                assert_eq!(cones[0].support, vec![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
                assert_eq!(cones[1].support, vec![[0.0, 0.0]]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in CaseKind::ALL {
            assert_eq!(k.name().parse::<CaseKind>().unwrap(), k);
        }
    }
}
