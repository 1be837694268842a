//! Piecewise-linear activations of the form `alpha(x) = s(x) * x` with a
//! sign selector `s : R -> {-1, 0, +1}`.
//!
//! Identity, ReLU and absolute value are the three named members of the
//! family. Anything else is a [`SignSelector`] over a finite interval
//! partition of the real line.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A value in `{-1, 0, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Neg => -1.0,
            Sign::Zero => 0.0,
            Sign::Pos => 1.0,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Sign::Neg),
            0 => Ok(Sign::Zero),
            1 => Ok(Sign::Pos),
            other => Err(format!("sign must be -1, 0 or 1, got {other}")),
        }
    }
}

/// Sign selector defined on the partition
/// `(-inf, t_1), [t_1, t_2), ..., [t_k, +inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSelector {
    thresholds: Vec<f64>,
    signs: Vec<Sign>,
}

impl SignSelector {
    pub fn new(thresholds: Vec<f64>, signs: Vec<Sign>) -> Result<Self> {
        if signs.len() != thresholds.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "sign selector needs {} signs for {} thresholds, got {}",
                thresholds.len() + 1,
                thresholds.len(),
                signs.len()
            )));
        }
        if thresholds.iter().any(|t| !t.is_finite()) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "sign selector thresholds must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { thresholds, signs })
    }

    pub fn sign(&self, x: f64) -> Sign {
        let idx = self.thresholds.partition_point(|&t| t <= x);
        self.signs[idx]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActivationKind {
    Identity,
    Relu,
    Abs,
    General(SignSelector),
}

impl ActivationKind {
    /// `s(x)`; ReLU and Abs both select `+1` at zero.
    pub fn selector(&self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => 1.0,
            ActivationKind::Relu => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Abs => {
                if x >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            ActivationKind::General(sel) => sel.sign(x).as_f64(),
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => x,
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Abs => x.abs(),
            ActivationKind::General(sel) => sel.sign(x).as_f64() * x,
        }
    }

    /// Subderivative used by training; zero at the kinks of ReLU and Abs.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => 1.0,
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Abs => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            ActivationKind::General(sel) => sel.sign(x).as_f64(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ActivationKind::Identity => "identity",
            ActivationKind::Relu => "relu",
            ActivationKind::Abs => "abs",
            ActivationKind::General(_) => "general",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActivationRepr {
    Named(String),
    General { general: SignSelector },
}

impl Serialize for ActivationKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ActivationKind::General(sel) => ActivationRepr::General {
                general: sel.clone(),
            }
            .serialize(s),
            named => s.serialize_str(named.name()),
        }
    }
}

impl<'de> Deserialize<'de> for ActivationKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ActivationRepr::deserialize(d)? {
            ActivationRepr::Named(name) => name.parse().map_err(de::Error::custom),
            ActivationRepr::General { general } => Ok(ActivationKind::General(general)),
        }
    }
}

impl std::str::FromStr for ActivationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ActivationKind::Identity),
            "relu" => Ok(ActivationKind::Relu),
            "abs" => Ok(ActivationKind::Abs),
            other => Err(Error::InvalidParameter(format!("unknown activation {other:?}"))),
        }
    }
}
