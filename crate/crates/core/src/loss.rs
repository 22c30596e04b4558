//! Separable losses `L(a, b) = f1(a) + f2(b) - h1(a) h2(b)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::CostMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossPreset {
    Square,
    Kl,
    Custom,
}

impl LossPreset {
    pub fn name(&self) -> &'static str {
        match self {
            LossPreset::Square => "square",
            LossPreset::Kl => "kl",
            LossPreset::Custom => "custom",
        }
    }
}

/// The four scalar maps of a separable loss, tagged with the preset they came
/// from.
#[derive(Debug, Clone, Copy)]
pub struct SeparableLoss {
    pub f1: fn(f64) -> f64,
    pub f2: fn(f64) -> f64,
    pub h1: fn(f64) -> f64,
    pub h2: fn(f64) -> f64,
    preset: LossPreset,
}

fn half_square(x: f64) -> f64 {
    0.5 * x * x
}

fn identity(x: f64) -> f64 {
    x
}

fn entropy(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln() - x
    }
}

fn ln(x: f64) -> f64 {
    x.ln()
}

impl SeparableLoss {
    /// `½(a - b)²` with `f1 = f2 = ½x²`, `h1 = h2 = x`.
    pub fn square() -> Self {
        SeparableLoss {
            f1: half_square,
            f2: half_square,
            h1: identity,
            h2: identity,
            preset: LossPreset::Square,
        }
    }

    /// `a log(a/b) - a + b` with `f1 = x log x - x`, `f2 = x`, `h1 = x`,
    /// `h2 = log x`.
    pub fn kl() -> Self {
        SeparableLoss {
            f1: entropy,
            f2: identity,
            h1: identity,
            h2: ln,
            preset: LossPreset::Kl,
        }
    }

    pub fn custom(
        f1: fn(f64) -> f64,
        f2: fn(f64) -> f64,
        h1: fn(f64) -> f64,
        h2: fn(f64) -> f64,
    ) -> Self {
        SeparableLoss {
            f1,
            f2,
            h1,
            h2,
            preset: LossPreset::Custom,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "square" => Ok(Self::square()),
            "kl" => Ok(Self::kl()),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss preset '{other}'"
            ))),
        }
    }

    pub fn preset(&self) -> LossPreset {
        self.preset
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        (self.f1)(a) + (self.f2)(b) - (self.h1)(a) * (self.h2)(b)
    }

    /// Checks the preset's domain on a pair of intra-space costs. The KL preset
    /// needs `C >= 0` (with `0 log 0 = 0`) and `C̄ > 0`.
    pub fn check_domain(&self, c: &CostMatrix, cb: &CostMatrix) -> Result<()> {
        if self.preset == LossPreset::Kl {
            if let Some(v) = c.matrix().iter().find(|v| **v < 0.0) {
                return Err(Error::LossDomain(format!(
                    "kl loss needs nonnegative first cost, found {v}"
                )));
            }
            if let Some(v) = cb.matrix().iter().find(|v| **v <= 0.0) {
                return Err(Error::LossDomain(format!(
                    "kl loss needs strictly positive second cost, found {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn map_f1(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m.map(self.f1)
    }

    pub fn map_f2(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m.map(self.f2)
    }

    pub fn map_h1(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m.map(self.h1)
    }

    pub fn map_h2(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        m.map(self.h2)
    }
}
