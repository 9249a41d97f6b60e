//! Textual state and settings specifications.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chsh_core::bell::optimize_settings;
use chsh_core::geometry::Settings;
use chsh_core::numerics::{ComplexMatrix4, C64};
use chsh_core::rng::stream;
use chsh_core::states::{isotropic, schmidt_pure, DensityMatrix, SchmidtAngle, Visibility};

use crate::error::CliError;

/// `schmidt:θ`, `isotropic:V,θ` or `mixed-file:path`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Schmidt(f64),
    Isotropic(f64, f64),
    MixedFile(PathBuf),
}

fn numbers(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| CliError::config(format!("{what}: `{x}` is not a number")))).collect()
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| CliError::config(format!("state: expected kind:params, got `{s}`")))?;
        match kind {
            "schmidt" => match numbers(rest, "state")?[..] {
                [t] => Ok(StateSpec::Schmidt(t)),
                _ => Err(CliError::config("state: schmidt takes one angle")),
            },
            "isotropic" => match numbers(rest, "state")?[..] {
                [v, t] => Ok(StateSpec::Isotropic(v, t)),
                _ => Err(CliError::config("state: isotropic takes V,theta")),
            },
            "mixed-file" if !rest.is_empty() => Ok(StateSpec::MixedFile(PathBuf::from(rest))),
            _ => Err(CliError::config(format!("state: unknown kind `{kind}` (schmidt, isotropic, mixed-file)"))),
        }
    }
}

impl StateSpec {
    pub fn resolve(&self) -> Result<DensityMatrix, CliError> {
        match self {
            StateSpec::Schmidt(t) => Ok(schmidt_pure(SchmidtAngle::new(*t)?)),
            StateSpec::Isotropic(v, t) => Ok(isotropic(Visibility::new(*v)?, SchmidtAngle::new(*t)?)),
            StateSpec::MixedFile(p) => load_density_matrix(p),
        }
    }

    /// `(V, ϑ)` tags for records.
    pub fn tags(&self) -> (Option<f64>, Option<f64>) {
        match self {
            StateSpec::Schmidt(t) => (Some(1.0), Some(*t)),
            StateSpec::Isotropic(v, t) => (Some(*v), Some(*t)),
            StateSpec::MixedFile(_) => (None, None),
        }
    }
}

/// Reads a JSON 4×4 array of `[re, im]` pairs and validates it.
pub fn load_density_matrix(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_density_matrix(&text)
}

pub fn parse_density_matrix(text: &str) -> Result<DensityMatrix, CliError> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text).map_err(|e| CliError::config(format!("state file: {e}")))?;
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(CliError::config("state file: expected a 4x4 array of [re, im] pairs"));
    }
    let mut m = ComplexMatrix4::ZERO;
    for (i, row) in rows.iter().enumerate() {
        for (j, [re, im]) in row.iter().enumerate() {
            m.0[i][j] = C64::new(*re, *im);
        }
    }
    Ok(DensityMatrix::new(m)?)
}

pub fn density_matrix_json(rho: &DensityMatrix) -> serde_json::Value {
    let m = rho.matrix();
    serde_json::Value::from(m.0.iter().map(|row| row.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

/// Twelve numbers, `random`, or `optimal:μ`.
#[derive(Debug, Clone, PartialEq)]
pub enum SettingsSpec {
    Explicit([f64; 12]),
    Random,
    Optimal(usize),
}

impl FromStr for SettingsSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "random" {
            return Ok(SettingsSpec::Random);
        }
        if let Some(mu) = s.strip_prefix("optimal:") {
            let mu: usize = mu.trim().parse().map_err(|_| CliError::config(format!("settings: bad index `{mu}`")))?;
            if mu > 3 {
                return Err(CliError::config(format!("settings: index {mu} is not in 0..=3")));
            }
            return Ok(SettingsSpec::Optimal(mu));
        }
        let v = numbers(s, "settings")?;
        let arr: [f64; 12] =
            v.try_into().map_err(|v: Vec<f64>| CliError::config(format!("settings: expected 12 numbers, got {}", v.len())))?;
        Ok(SettingsSpec::Explicit(arr))
    }
}

impl SettingsSpec {
    /// `random` draws from `stream(seed, 0)`; `optimal:μ` runs the optimiser
    /// with restarts drawn from the same stream.
    pub fn resolve(&self, rho: &DensityMatrix, seed: Option<u64>) -> Result<Settings, CliError> {
        match self {
            SettingsSpec::Explicit(v) => Ok(Settings::from_components(*v)?),
            SettingsSpec::Random => {
                let seed = seed.ok_or_else(|| CliError::config("settings: `random` needs a seed (--seed, config `seed`, or CHSH_SEED)"))?;
                Ok(Settings::random(&mut stream(seed, 0)))
            }
            SettingsSpec::Optimal(mu) => Ok(optimize_settings(rho, *mu, &mut stream(seed.unwrap_or(0), 0))?.settings),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_specs_parse() {
        assert_eq!("schmidt:0.5".parse::<StateSpec>().unwrap(), StateSpec::Schmidt(0.5));
        assert_eq!("isotropic:0.3, 0.7".parse::<StateSpec>().unwrap(), StateSpec::Isotropic(0.3, 0.7));
        assert_eq!("mixed-file:a/b.json".parse::<StateSpec>().unwrap(), StateSpec::MixedFile("a/b.json".into()));
        for bad in ["schmidt", "schmidt:x", "isotropic:1", "werner:1", "mixed-file:"] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
        assert!(StateSpec::Isotropic(1.5, 0.1).resolve().is_err());
    }

    #[test]
    fn settings_specs_parse() {
        assert_eq!("random".parse::<SettingsSpec>().unwrap(), SettingsSpec::Random);
        assert_eq!("optimal:2".parse::<SettingsSpec>().unwrap(), SettingsSpec::Optimal(2));
        assert!("optimal:4".parse::<SettingsSpec>().is_err());
        assert!("1,2,3".parse::<SettingsSpec>().is_err());
        let s: SettingsSpec = "1,0,0, 0,0,1, 1,0,1, 1,0,-1".parse().unwrap();
        let rho = DensityMatrix::maximally_mixed();
        let r = s.resolve(&rho, None).unwrap();
        assert!((r.b2.z() + core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(SettingsSpec::Random.resolve(&rho, None).is_err());
        assert_eq!(SettingsSpec::Random.resolve(&rho, Some(4)).unwrap(), SettingsSpec::Random.resolve(&rho, Some(4)).unwrap());
    }

    #[test]
    fn density_matrix_round_trip() {
        let rho = isotropic(Visibility::new(0.4).unwrap(), SchmidtAngle::new(0.3).unwrap());
        let text = density_matrix_json(&rho).to_string();
        assert_eq!(parse_density_matrix(&text).unwrap(), rho);
        assert!(parse_density_matrix("[[1,2]]").is_err());
        let not_unit = "[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]";
        assert!(matches!(parse_density_matrix(not_unit), Err(CliError::Core(_))));
    }
}
