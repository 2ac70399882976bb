//! Flat key=value run configuration: one pair per line, `#` comments,
//! unknown keys rejected with line diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use decofree::analysis::{InitialAtom, ModelKind, ScanAxis};
use decofree::integrate::Tolerances;
use decofree::ion_cavity::{DeltaA, IonCavityParams};

#[derive(Debug, Clone)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

/// Everything a `run` or `scan` invocation needs, parsed losslessly from a
/// key=value file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub g: f64,
    pub omega_c: f64,
    pub phi_c: f64,
    pub delta_c: f64,
    pub delta_a: DeltaA,
    pub kappa: f64,
    pub gamma: f64,
    pub nbar_a: f64,
    pub nbar_s: f64,
    pub fock_dim: usize,
    pub model: ModelKind,
    pub initial_atom: InitialAtom,
    pub t_max: f64,
    pub dt_out: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub fock_check: bool,
    pub scan_axis: Option<ScanAxis>,
    pub scan_values: Vec<f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "g", "omega_c", "phi_c", "delta_c", "delta_a", "kappa", "gamma", "nbar_a", "nbar_s",
    "fock_dim", "model", "initial_atom", "t_max", "dt_out", "rel_tol", "abs_tol", "fock_check",
    "scan_axis", "scan_values",
];

fn parse_f64(key: &str, v: &str, line: usize) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| ConfigError(format!("line {line}: key '{key}': expected a number, got '{v}'")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("line {line_no}: expected key=value, got '{line}'"))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError(format!("line {line_no}: unknown key '{key}'")));
            }
            if map.insert(key.to_string(), (value.to_string(), line_no)).is_some() {
                return Err(ConfigError(format!("line {line_no}: duplicate key '{key}'")));
            }
        }

        let get = |key: &str| map.get(key).map(|(v, l)| (v.as_str(), *l));
        let require_f64 = |key: &str| -> Result<f64> {
            let (v, l) = get(key).ok_or_else(|| ConfigError(format!("missing key '{key}'")))?;
            parse_f64(key, v, l)
        };
        let optional_f64 = |key: &str, default: f64| -> Result<f64> {
            match get(key) {
                Some((v, l)) => parse_f64(key, v, l),
                None => Ok(default),
            }
        };

        let delta_a = match get("delta_a") {
            None => DeltaA::Auto,
            Some((v, _)) if v == "auto" => DeltaA::Auto,
            Some((v, l)) => DeltaA::Fixed(parse_f64("delta_a", v, l)?),
        };
        let model = match get("model") {
            None => ModelKind::Full,
            Some(("full", _)) => ModelKind::Full,
            Some(("effective", _)) => ModelKind::Effective,
            Some((v, l)) => {
                return Err(ConfigError(format!(
                    "line {l}: key 'model': expected full|effective, got '{v}'"
                )))
            }
        };
        let initial_atom = match get("initial_atom") {
            None => InitialAtom::Ground,
            Some(("g", _)) => InitialAtom::Ground,
            Some(("e", _)) => InitialAtom::Excited,
            Some(("plus", _)) => InitialAtom::Plus,
            Some((v, l)) => {
                return Err(ConfigError(format!(
                    "line {l}: key 'initial_atom': expected g|e|plus, got '{v}'"
                )))
            }
        };
        let fock_check = match get("fock_check") {
            None => false,
            Some(("true", _)) => true,
            Some(("false", _)) => false,
            Some((v, l)) => {
                return Err(ConfigError(format!(
                    "line {l}: key 'fock_check': expected true|false, got '{v}'"
                )))
            }
        };
        let fock_dim = match get("fock_dim") {
            None => 15,
            Some((v, l)) => v.parse::<usize>().map_err(|_| {
                ConfigError(format!("line {l}: key 'fock_dim': expected a positive integer"))
            })?,
        };
        let scan_axis = match get("scan_axis") {
            None => None,
            Some(("nbar", _)) => Some(ScanAxis::Nbar),
            Some(("g", _)) => Some(ScanAxis::Coupling),
            Some(("delta_c", _)) => Some(ScanAxis::DeltaC),
            Some((v, l)) => {
                return Err(ConfigError(format!(
                    "line {l}: key 'scan_axis': expected nbar|g|delta_c, got '{v}'"
                )))
            }
        };
        let scan_values = match get("scan_values") {
            None => Vec::new(),
            Some((v, l)) => v
                .split(',')
                .map(|x| parse_f64("scan_values", x.trim(), l))
                .collect::<Result<Vec<f64>>>()?,
        };

        Ok(RunConfig {
            g: require_f64("g")?,
            omega_c: require_f64("omega_c")?,
            phi_c: optional_f64("phi_c", 0.0)?,
            delta_c: require_f64("delta_c")?,
            delta_a,
            kappa: require_f64("kappa")?,
            gamma: require_f64("gamma")?,
            nbar_a: optional_f64("nbar_a", 0.0)?,
            nbar_s: optional_f64("nbar_s", 0.0)?,
            fock_dim,
            model,
            initial_atom,
            t_max: require_f64("t_max")?,
            dt_out: require_f64("dt_out")?,
            rel_tol: optional_f64("rel_tol", 1e-8)?,
            abs_tol: optional_f64("abs_tol", 1e-10)?,
            fock_check,
            scan_axis,
            scan_values,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn params(&self) -> IonCavityParams {
        IonCavityParams {
            g: self.g,
            omega_c: self.omega_c,
            phi_c: self.phi_c,
            delta_c: self.delta_c,
            delta_a: self.delta_a,
            kappa: self.kappa,
            gamma: self.gamma,
            nbar_a: self.nbar_a,
            nbar_s: self.nbar_s,
            fock_dim: self.fock_dim,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances { rel: self.rel_tol, abs: self.abs_tol }
    }

    /// Canonical key=value echo; `parse(echo(c)) == c` for any valid config.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| m.insert(k.to_string(), v);
        put("g", format!("{:e}", self.g));
        put("omega_c", format!("{:e}", self.omega_c));
        put("phi_c", format!("{:e}", self.phi_c));
        put("delta_c", format!("{:e}", self.delta_c));
        put(
            "delta_a",
            match self.delta_a {
                DeltaA::Auto => "auto".to_string(),
                DeltaA::Fixed(v) => format!("{v:e}"),
            },
        );
        put("kappa", format!("{:e}", self.kappa));
        put("gamma", format!("{:e}", self.gamma));
        put("nbar_a", format!("{:e}", self.nbar_a));
        put("nbar_s", format!("{:e}", self.nbar_s));
        put("fock_dim", self.fock_dim.to_string());
        put(
            "model",
            match self.model {
                ModelKind::Full => "full",
                ModelKind::Effective => "effective",
            }
            .to_string(),
        );
        put(
            "initial_atom",
            match self.initial_atom {
                InitialAtom::Ground => "g",
                InitialAtom::Excited => "e",
                InitialAtom::Plus => "plus",
            }
            .to_string(),
        );
        put("t_max", format!("{:e}", self.t_max));
        put("dt_out", format!("{:e}", self.dt_out));
        put("rel_tol", format!("{:e}", self.rel_tol));
        put("abs_tol", format!("{:e}", self.abs_tol));
        put("fock_check", self.fock_check.to_string());
        if let Some(axis) = self.scan_axis {
            put(
                "scan_axis",
                match axis {
                    ScanAxis::Nbar => "nbar",
                    ScanAxis::Coupling => "g",
                    ScanAxis::DeltaC => "delta_c",
                }
                .to_string(),
            );
        }
        if !self.scan_values.is_empty() {
            put(
                "scan_values",
                self.scan_values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","),
            );
        }
        m
    }

    pub fn echo_text(&self) -> String {
        self.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
