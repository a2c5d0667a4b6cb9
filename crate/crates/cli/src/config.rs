//! TOML run configuration.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major lists of rows, and every index
//! a user types (involutions, words, generator indices) is 1-based.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twistfock::hilbert::{build_standard_subspace, ExactSpectrum};
use twistfock::linalg::{c, CMat, C64};
use twistfock::twist::make_twist;
use twistfock::{BasisMode, Dim2Family, Model, Settings, SubspaceSpec, TwistKind};

use crate::CliError;

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subspace: SubspaceConfig,
    pub twist: TwistConfig,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub input: InputConfig,
}

/// Exactly one of `tracial`, `eigenvalues`, `matrix_algebra`, `delta` is set.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceConfig {
    pub tracial: Option<usize>,
    pub eigenvalues: Option<Vec<f64>>,
    /// `J e_i = e_{involution[i]}`; defaults to the identity.
    pub involution: Option<Vec<usize>>,
    /// Weights `h` of the state on `M_n(ℂ)`.
    pub matrix_algebra: Option<Vec<f64>>,
    pub delta: Option<Matrix>,
    pub j: Option<Matrix>,
    #[serde(default)]
    pub mode: BasisMode,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwistConfig {
    /// `zero`, `q-flip`, `q-ij`, `dim2`, `matrix-algebra` or `raw`.
    pub kind: String,
    pub q: Option<f64>,
    pub coeffs: Option<Matrix>,
    /// For `dim2`: `diag`, `anti` or `mixed`.
    pub family: Option<String>,
    pub q1: Option<f64>,
    pub q2: Option<f64>,
    pub q12: Option<f64>,
    pub c: Option<f64>,
    pub epsilon: Option<i8>,
    /// For `matrix-algebra`; defaults to the subspace weights.
    pub h: Option<Vec<f64>>,
    pub matrix: Option<Matrix>,
    /// TOML file holding `matrix = [...]`, relative to the config file.
    pub matrix_file: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub tolerance: f64,
    pub size_cap: usize,
    /// Fock truncation `N`.
    pub truncation: usize,
    /// Conjugate series order `M`.
    pub series_order: usize,
    /// Radius for `‖·‖_R`.
    #[serde(rename = "R")]
    pub r: f64,
    /// Transport threshold; there is no default.
    #[serde(rename = "C_R")]
    pub c_r: Option<f64>,
    /// Highest level at which strict positivity is certified.
    pub validation_level: usize,
    pub denominator_bound: u64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            tolerance: 1e-10,
            size_cap: 1 << 26,
            truncation: 4,
            series_order: 2,
            r: 1.5,
            c_r: None,
            validation_level: 4,
            denominator_bound: 64,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub word: Option<Vec<usize>>,
    /// Tensor coordinates on `word_length` slots; overrides `word` for `wick` and `dq`.
    pub tensor: Option<Vec<Complex>>,
    pub degree: Option<usize>,
    /// Generator index for `dq`.
    pub index: Option<usize>,
    /// Spectrum for `type` and `noninjectivity`; defaults to the spectrum of `Δ`.
    pub spectrum: Option<Vec<f64>>,
    pub exact: Option<ExactSpectrum>,
    /// Norm parameter for `noninjectivity`; defaults to `‖T‖`.
    pub q: Option<f64>,
}

/// Command line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub truncation: Option<usize>,
    pub series_order: Option<usize>,
    pub tolerance: Option<f64>,
    pub size_cap: Option<usize>,
    pub r: Option<f64>,
    pub c_r: Option<f64>,
}

fn parse_err(msg: impl Into<String>) -> CliError {
    CliError::ConfigParse(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
        if let Some(file) = cfg.twist.matrix_file.take() {
            let full = path.parent().map(|p| p.join(&file)).unwrap_or(file);
            #[derive(Deserialize)]
            struct MatrixFile {
                matrix: Matrix,
            }
            let text = std::fs::read_to_string(&full).map_err(|e| parse_err(format!("{}: {e}", full.display())))?;
            let m: MatrixFile = toml::from_str(&text).map_err(|e| parse_err(format!("{}: {e}", full.display())))?;
            if cfg.twist.matrix.is_some() {
                return Err(parse_err("twist: give either matrix or matrix_file"));
            }
            cfg.twist.matrix = Some(m.matrix);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        let n = &mut self.numerics;
        n.truncation = o.truncation.unwrap_or(n.truncation);
        n.series_order = o.series_order.unwrap_or(n.series_order);
        n.tolerance = o.tolerance.unwrap_or(n.tolerance);
        n.size_cap = o.size_cap.unwrap_or(n.size_cap);
        n.r = o.r.unwrap_or(n.r);
        if o.c_r.is_some() {
            n.c_r = o.c_r;
        }
    }

    pub fn check(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        if !(n.tolerance > 0.0) || !(n.r > 0.0) || n.c_r.is_some_and(|v| !(v > 0.0)) {
            return Err(parse_err("numerics: tolerance, R and C_R must be positive"));
        }
        if n.size_cap == 0 || n.denominator_bound == 0 || n.validation_level == 0 {
            return Err(parse_err("numerics: size_cap, denominator_bound and validation_level must be positive"));
        }
        Ok(())
    }

    pub fn settings(&self) -> Settings {
        Settings {
            tolerance: self.numerics.tolerance,
            size_cap: self.numerics.size_cap,
            positivity_level: self.numerics.validation_level,
            ..Settings::default()
        }
    }

    pub fn subspace_spec(&self) -> Result<SubspaceSpec, CliError> {
        let s = &self.subspace;
        let given = [s.tracial.is_some(), s.eigenvalues.is_some(), s.matrix_algebra.is_some(), s.delta.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(parse_err("subspace: set exactly one of tracial, eigenvalues, matrix_algebra, delta"));
        }
        if let Some(d) = s.tracial {
            return Ok(SubspaceSpec::tracial(d));
        }
        if let Some(h) = &s.matrix_algebra {
            return Ok(SubspaceSpec::matrix_algebra(h));
        }
        if let Some(ev) = &s.eigenvalues {
            let involution = match &s.involution {
                Some(inv) => one_based(inv, ev.len(), "subspace.involution")?,
                None => (0..ev.len()).collect(),
            };
            return Ok(SubspaceSpec::Eigen { eigenvalues: ev.clone(), involution });
        }
        let delta = matrix(s.delta.as_ref().expect("checked above"), "subspace.delta")?;
        let j = matrix(s.j.as_ref().ok_or_else(|| parse_err("subspace: delta needs j"))?, "subspace.j")?;
        Ok(SubspaceSpec::Matrices { delta, j })
    }

    pub fn twist_kind(&self, d: usize) -> Result<TwistKind, CliError> {
        let t = &self.twist;
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| parse_err(format!("twist: {} needs {name}", t.kind)));
        Ok(match t.kind.as_str() {
            "zero" => TwistKind::Raw(CMat::zeros(d * d, d * d)),
            "q-flip" => TwistKind::QFlip { q: need(t.q, "q")? },
            "q-ij" => TwistKind::Qij {
                coeffs: matrix(t.coeffs.as_ref().ok_or_else(|| parse_err("twist: q-ij needs coeffs"))?, "twist.coeffs")?,
            },
            "dim2" => {
                let family = match t.family.as_deref() {
                    Some("diag") => Dim2Family::Diag { q1: need(t.q1, "q1")?, q12: need(t.q12, "q12")?, q2: need(t.q2, "q2")? },
                    Some("anti") => Dim2Family::Anti { q1: need(t.q1, "q1")?, c: need(t.c, "c")? },
                    Some("mixed") => Dim2Family::Mixed {
                        q1: need(t.q1, "q1")?,
                        q2: need(t.q2, "q2")?,
                        epsilon: t.epsilon.ok_or_else(|| parse_err("twist: mixed needs epsilon"))?,
                    },
                    other => return Err(parse_err(format!("twist: unknown dim2 family {other:?}"))),
                };
                TwistKind::Dim2(family)
            }
            "matrix-algebra" => {
                let h = t
                    .h
                    .clone()
                    .or_else(|| self.subspace.matrix_algebra.clone())
                    .ok_or_else(|| parse_err("twist: matrix-algebra needs h"))?;
                TwistKind::MatrixAlgebra { h, c: need(t.c, "c")? }
            }
            "raw" => TwistKind::Raw(matrix(
                t.matrix.as_ref().ok_or_else(|| parse_err("twist: raw needs matrix or matrix_file"))?,
                "twist.matrix",
            )?),
            other => return Err(parse_err(format!("twist: unknown kind {other:?}"))),
        })
    }

    /// Subspace, twist (validated) and caches.
    pub fn model(&self) -> Result<Model, CliError> {
        let settings = self.settings();
        let h = build_standard_subspace(&self.subspace_spec()?, self.subspace.mode, settings.tolerance)
            .map_err(|e| CliError::library("subspace", e))?;
        let kind = self.twist_kind(h.dim())?;
        let t = make_twist(&kind, &h).map_err(|e| CliError::library("twist", e))?.validated(
            &h,
            self.numerics.validation_level,
            settings.tolerance,
            settings.size_cap,
        );
        Model::new(h, t, settings).map_err(|e| CliError::library("model", e))
    }
}

pub fn complex(z: &Complex) -> C64 {
    c(z[0], z[1])
}

pub fn matrix(rows: &Matrix, name: &str) -> Result<CMat, CliError> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(parse_err(format!("{name}: rows must be non-empty and of equal length")));
    }
    Ok(CMat::from_fn(n, m, |i, j| complex(&rows[i][j])))
}

/// Converts 1-based indices in `1..=d` to 0-based.
pub fn one_based(v: &[usize], d: usize, name: &str) -> Result<Vec<usize>, CliError> {
    v.iter()
        .map(|&i| if (1..=d).contains(&i) { Ok(i - 1) } else { Err(parse_err(format!("{name}: index {i} outside 1..={d}"))) })
        .collect()
}
