use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PI_SUM_TOL: f64 = 1e-12;
const SYM_TOL: f64 = 1e-12;

/// BSBM parameters `(pi, P, eta, nu)`.
///
/// The sign matrix `Q = (1 + eta ∘ nu nuᵀ) / 2` is always derived from
/// `eta` and `nu`; it is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BsbmParams {
    pi: Vec<f64>,
    p: DMatrix<f64>,
    eta: DMatrix<f64>,
    nu: Vec<i8>,
}

/// On-disk JSON layout. `Q` is deliberately absent.
#[derive(Serialize, Deserialize)]
struct ParamsFile {
    #[serde(rename = "K")]
    k: usize,
    pi: Vec<f64>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
    eta: Vec<Vec<f64>>,
    nu: Vec<i8>,
}

impl BsbmParams {
    pub fn new(pi: Vec<f64>, p: DMatrix<f64>, eta: DMatrix<f64>, nu: Vec<i8>) -> Result<Self> {
        let params = Self { pi, p, eta, nu };
        params.validate()?;
        Ok(params)
    }

    /// The planted family used in simulations: `P = p_bt + (p_in - p_bt) I(l = l')`.
    pub fn planted(pi: Vec<f64>, p_in: f64, p_bt: f64, eta: DMatrix<f64>, nu: Vec<i8>) -> Result<Self> {
        let k = pi.len();
        let p = DMatrix::from_fn(k, k, |a, b| if a == b { p_in } else { p_bt });
        Self::new(pi, p, eta, nu)
    }

    fn validate(&self) -> Result<()> {
        let k = self.pi.len();
        let bad = |m: String| Err(Error::InvalidParams(m));
        if k == 0 {
            return bad("K must be at least 1".into());
        }
        if self.p.shape() != (k, k) || self.eta.shape() != (k, k) || self.nu.len() != k {
            return bad(format!(
                "inconsistent shapes: pi {k}, P {:?}, eta {:?}, nu {}",
                self.p.shape(),
                self.eta.shape(),
                self.nu.len()
            ));
        }
        if self.pi.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return bad("pi entries must be finite and non-negative".into());
        }
        let sum: f64 = self.pi.iter().sum();
        if (sum - 1.0).abs() > PI_SUM_TOL {
            return bad(format!("pi sums to {sum}, expected 1"));
        }
        for (name, m) in [("P", &self.p), ("eta", &self.eta)] {
            for a in 0..k {
                for b in 0..k {
                    let x = m[(a, b)];
                    if !(0.0..=1.0).contains(&x) {
                        return bad(format!("{name}[{a}][{b}] = {x} outside [0, 1]"));
                    }
                    if (x - m[(b, a)]).abs() > SYM_TOL {
                        return bad(format!("{name} is not symmetric at ({a}, {b})"));
                    }
                }
            }
        }
        if self.nu.iter().any(|&s| s != 1 && s != -1) {
            return bad("nu entries must be -1 or 1".into());
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.pi.len()
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn eta(&self) -> &DMatrix<f64> {
        &self.eta
    }

    pub fn nu(&self) -> &[i8] {
        &self.nu
    }

    pub fn q_entry(&self, a: usize, b: usize) -> f64 {
        (1.0 + self.eta[(a, b)] * f64::from(self.nu[a]) * f64::from(self.nu[b])) / 2.0
    }

    pub fn q(&self) -> DMatrix<f64> {
        let k = self.k();
        DMatrix::from_fn(k, k, |a, b| self.q_entry(a, b))
    }

    /// Communities with `nu = +1` and with `nu = -1`.
    pub fn meta_groups(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.k()).partition(|&l| self.nu[l] == 1)
    }

    /// Same model with `nu -> -nu`; `Q` is unchanged.
    pub fn flipped(&self) -> Self {
        Self {
            nu: self.nu.iter().map(|&s| -s).collect(),
            ..self.clone()
        }
    }

    /// Rename community `l` to `perm[l]` in every parameter.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let k = self.k();
        if perm.len() != k {
            return Err(Error::LengthMismatch(perm.len(), k));
        }
        let mut inv = vec![usize::MAX; k];
        for (l, &t) in perm.iter().enumerate() {
            if t >= k || inv[t] != usize::MAX {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            inv[t] = l;
        }
        Ok(Self {
            pi: (0..k).map(|t| self.pi[inv[t]]).collect(),
            p: DMatrix::from_fn(k, k, |a, b| self.p[(inv[a], inv[b])]),
            eta: DMatrix::from_fn(k, k, |a, b| self.eta[(inv[a], inv[b])]),
            nu: (0..k).map(|t| self.nu[inv[t]]).collect(),
        })
    }

    pub fn to_json(&self) -> String {
        let k = self.k();
        let rows = |m: &DMatrix<f64>| (0..k).map(|a| (0..k).map(|b| m[(a, b)]).collect()).collect();
        let file = ParamsFile {
            k,
            pi: self.pi.clone(),
            p: rows(&self.p),
            eta: rows(&self.eta),
            nu: self.nu.clone(),
        };
        serde_json::to_string_pretty(&file).expect("plain numeric data always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ParamsFile = serde_json::from_str(text)?;
        let k = file.k;
        let matrix = |name: &str, rows: &[Vec<f64>]| -> Result<DMatrix<f64>> {
            if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidParams(format!("{name} must be {k}x{k}")));
            }
            Ok(DMatrix::from_fn(k, k, |a, b| rows[a][b]))
        };
        if file.pi.len() != k {
            return Err(Error::InvalidParams(format!("pi must have length {k}")));
        }
        let p = matrix("P", &file.p)?;
        let eta = matrix("eta", &file.eta)?;
        Self::new(file.pi, p, eta, file.nu)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> BsbmParams {
        let eta = DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.1, 0.5, 0.9, 0.3, 0.1, 0.3, 0.4]);
        BsbmParams::planted(vec![0.2, 0.3, 0.5], 0.13, 0.07, eta, vec![1, -1, 1]).unwrap()
    }

    #[test]
    fn q_is_derived_and_flip_invariant() {
        let p = three();
        let q = p.q();
        assert!((q[(0, 1)] - 0.25).abs() < 1e-15);
        assert!((q[(0, 2)] - 0.55).abs() < 1e-15);
        assert_eq!(p.flipped().q(), q);
        assert_eq!(p.meta_groups(), (vec![0, 2], vec![1]));
    }

    #[test]
    fn json_round_trip_omits_q() {
        let p = three();
        let text = p.to_json();
        assert!(!text.contains("\"Q\""));
        assert!(text.contains("\"K\": 3"));
        assert_eq!(BsbmParams::from_json(&text).unwrap(), p);
    }

    #[test]
    fn invalid_params_rejected() {
        let eta = DMatrix::from_element(2, 2, 0.5);
        assert!(BsbmParams::planted(vec![0.5, 0.6], 0.1, 0.1, eta.clone(), vec![1, -1]).is_err());
        assert!(BsbmParams::planted(vec![0.5, 0.5], 1.1, 0.1, eta.clone(), vec![1, -1]).is_err());
        assert!(BsbmParams::planted(vec![0.5, 0.5], 0.1, 0.1, eta.clone(), vec![1, 0]).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.1]);
        assert!(BsbmParams::new(vec![0.5, 0.5], asym, eta, vec![1, 1]).is_err());
        assert!(BsbmParams::from_json("{\"K\":2,\"pi\":[1.0],\"P\":[],\"eta\":[],\"nu\":[]}").is_err());
    }

    #[test]
    fn permutation_relabels_consistently() {
        let p = three();
        let perm = [2, 0, 1];
        let pp = p.permuted(&perm).unwrap();
        for a in 0..3 {
            assert_eq!(pp.pi()[perm[a]], p.pi()[a]);
            assert_eq!(pp.nu()[perm[a]], p.nu()[a]);
            for b in 0..3 {
                assert_eq!(pp.q_entry(perm[a], perm[b]), p.q_entry(a, b));
            }
        }
    }
}
