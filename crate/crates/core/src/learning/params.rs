use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::latent::LatentModel;
use crate::model::WorthModel;

/// Item parameters of the collaborative-filtering latent OSM.
///
/// For hidden unit `k` the potentials are `log φ_k(i~j) = ν + (W_ik + W_jk)/2`
/// and `log ψ_k(i≻j) = W_ik`; the base model uses `u` in place of `W[:, k]`.
/// `w` is stored row-major, `n_items × n_hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct CfParams {
    pub nu: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    n_hidden: usize,
}

impl CfParams {
    pub fn new(nu: f64, u: Vec<f64>, w: Vec<f64>, n_hidden: usize) -> Result<Self> {
        if w.len() != u.len() * n_hidden {
            return Err(Error::DimensionMismatch {
                what: "W entries",
                expected: u.len() * n_hidden,
                found: w.len(),
            });
        }
        let p = Self { nu, u, w, n_hidden };
        p.check_finite()?;
        Ok(p)
    }

    pub fn zeros(n_items: usize, n_hidden: usize) -> Self {
        Self {
            nu: 0.0,
            u: vec![0.0; n_items],
            w: vec![0.0; n_items * n_hidden],
            n_hidden,
        }
    }

    /// `ν = 0`, `u` and `W` uniform on `±scale`.
    pub fn random<R: Rng + ?Sized>(n_items: usize, n_hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| if scale > 0.0 { rng.gen_range(-scale..=scale) } else { 0.0 })
                .collect()
        };
        let u = draw(n_items);
        let w = draw(n_items * n_hidden);
        Self { nu: 0.0, u, w, n_hidden }
    }

    /// The default training initialization.
    pub fn init<R: Rng + ?Sized>(n_items: usize, n_hidden: usize, rng: &mut R) -> Self {
        Self::random(n_items, n_hidden, 0.01, rng)
    }

    pub fn n_items(&self) -> usize {
        self.u.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    #[inline]
    pub fn w_at(&self, item: usize, k: usize) -> f64 {
        self.w[item * self.n_hidden + k]
    }

    pub fn check_finite(&self) -> Result<()> {
        if !self.nu.is_finite() || self.u.iter().chain(&self.w).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameters"));
        }
        Ok(())
    }

    /// The latent OSM over all items.
    pub fn latent_model(&self) -> LatentModel<WorthModel> {
        self.build(|f| (0..self.n_items()).map(f).collect())
    }

    /// The latent OSM over `items`, local object `o` being `items[o]`.
    pub fn latent_model_for(&self, items: &[usize]) -> Result<LatentModel<WorthModel>> {
        if let Some(&bad) = items.iter().find(|&&i| i >= self.n_items()) {
            return Err(Error::OutOfRange {
                value: bad as f64,
                min: 0.0,
                max: self.n_items() as f64 - 1.0,
            });
        }
        Ok(self.build(|f| items.iter().map(|&i| f(i)).collect()))
    }

    fn build<F>(&self, gather: F) -> LatentModel<WorthModel>
    where
        F: Fn(&dyn Fn(usize) -> f64) -> Vec<f64>,
    {
        let base = WorthModel {
            nu: self.nu,
            worth: gather(&|i| self.u[i]),
        };
        let hidden = (0..self.n_hidden)
            .map(|k| WorthModel {
                nu: self.nu,
                worth: gather(&|i| self.w_at(i, k)),
            })
            .collect();
        LatentModel { base, hidden }
    }

    /// `(ν, u, W)` flattened.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + self.u.len() + self.w.len());
        v.push(self.nu);
        v.extend_from_slice(&self.u);
        v.extend_from_slice(&self.w);
        v
    }

    /// Inverse of [`to_vec`](Self::to_vec) for this shape.
    pub fn from_vec(&self, v: &[f64]) -> Result<Self> {
        let n = self.n_items();
        if v.len() != 1 + n + self.w.len() {
            return Err(Error::DimensionMismatch {
                what: "flattened parameters",
                expected: 1 + n + self.w.len(),
                found: v.len(),
            });
        }
        Self::new(v[0], v[1..=n].to_vec(), v[n + 1..].to_vec(), self.n_hidden)
    }
}
