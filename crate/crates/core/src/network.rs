//! Networks as matrix chains `W_L . a . W_{L-1} . a . ... . a . W_0` without
//! shift vectors, together with the path norm and the structural combinators
//! used by the constructions.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::activation::ActivationKind;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Free-form construction metadata, serialized with sorted keys.
pub type Meta = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr")]
pub struct Network {
    activation: ActivationKind,
    weights: Vec<Matrix>,
    #[serde(default)]
    meta: Meta,
}

#[derive(Deserialize)]
struct NetworkRepr {
    activation: ActivationKind,
    weights: Vec<Matrix>,
    #[serde(default)]
    meta: Meta,
}

impl TryFrom<NetworkRepr> for Network {
    type Error = Error;
    fn try_from(r: NetworkRepr) -> Result<Self> {
        Ok(Network::new(r.activation, r.weights)?.with_meta_map(r.meta))
    }
}

impl Network {
    /// Validates that `weights[i]` has shape `p_{i+1} x p_i` and the shapes chain.
    pub fn new(activation: ActivationKind, weights: Vec<Matrix>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        for (i, pair) in weights.windows(2).enumerate() {
            if pair[1].cols() != pair[0].rows() {
                return Err(Error::DimensionMismatch {
                    layer: i + 1,
                    expected: pair[0].rows(),
                    got: pair[1].cols(),
                });
            }
        }
        Ok(Self {
            activation,
            weights,
            meta: Meta::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn with_meta_map(mut self, meta: Meta) -> Self {
        self.meta.extend(meta);
        self
    }

    pub fn activation(&self) -> &ActivationKind {
        &self.activation
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    /// Number of hidden layers `L`; the network holds `L + 1` matrices.
    pub fn depth(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights[self.weights.len() - 1].rows()
    }

    /// Width vector `(p_0, ..., p_{L+1})`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.weights.iter().map(Matrix::rows))
            .collect()
    }

    pub fn max_width(&self) -> usize {
        self.widths().into_iter().max().unwrap_or(0)
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.rows() * w.cols()).sum()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "network input".into(),
            });
        }
        let mut h = self.weights[0].mul_vec(x);
        for w in &self.weights[1..] {
            for v in h.iter_mut() {
                *v = self.activation.apply(*v);
            }
            h = w.mul_vec(&h);
        }
        Ok(h)
    }

    /// Scalar-output convenience; errors when the output is not one-dimensional.
    pub fn eval_scalar(&self, x: &[f64]) -> Result<f64> {
        let out = self.eval(x)?;
        if out.len() != 1 {
            return Err(Error::DimensionMismatch {
                layer: self.depth(),
                expected: 1,
                got: out.len(),
            });
        }
        Ok(out[0])
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self)
    }

    /// `|W_L| |W_{L-1}| ... |W_0|`, a `p_{L+1} x p_0` matrix.
    pub fn path_matrix(&self) -> Matrix {
        let last = self.weights.len() - 1;
        let mut acc = self.weights[last].abs();
        for w in self.weights[..last].iter().rev() {
            acc = acc
                .matmul(&w.abs())
                .expect("network shapes chain by construction");
        }
        acc
    }

    /// Sum of all entries of [`Network::path_matrix`].
    pub fn path_norm(&self) -> f64 {
        self.path_matrix().sum()
    }

    pub fn per_layer_l1(&self) -> Vec<f64> {
        self.weights.iter().map(Matrix::l1_norm).collect()
    }

    pub fn l1_param_norm(&self) -> f64 {
        self.per_layer_l1().iter().sum()
    }

    fn check_activation(&self, other: &Network) -> Result<()> {
        if self.activation != other.activation {
            return Err(Error::ActivationMismatch {
                left: self.activation.to_string(),
                right: other.activation.to_string(),
            });
        }
        Ok(())
    }

    /// `second . a . first`: the output of `first` passes through one
    /// activation before entering `second`.
    pub fn compose(first: &Network, second: &Network) -> Result<Network> {
        first.check_activation(second)?;
        if second.input_dim() != first.output_dim() {
            return Err(Error::DimensionMismatch {
                layer: first.weights.len(),
                expected: first.output_dim(),
                got: second.input_dim(),
            });
        }
        let weights = first
            .weights
            .iter()
            .chain(&second.weights)
            .cloned()
            .collect();
        Network::new(first.activation.clone(), weights)
    }

    /// Block-diagonal stack of `nets` acting on concatenated inputs.
    ///
    /// Shallower networks are padded in front with identity matrices. Under
    /// `Abs` or `Relu` this preserves their values only on nonnegative inputs.
    pub fn parallel(nets: &[Network]) -> Result<Network> {
        let first = nets
            .first()
            .ok_or_else(|| Error::InvalidParameter("parallel needs at least one network".into()))?;
        for n in &nets[1..] {
            first.check_activation(n)?;
        }
        let depth = nets.iter().map(Network::depth).max().unwrap_or(0);
        let padded: Vec<Network> = nets.iter().map(|n| n.pad_front(depth)).collect();
        let weights = (0..=depth)
            .map(|layer| {
                let blocks: Vec<&Matrix> = padded.iter().map(|n| &n.weights[layer]).collect();
                Matrix::block_diag(&blocks)
            })
            .collect();
        Network::new(first.activation.clone(), weights)
    }

    /// Prepends identity layers until the network has `depth` hidden layers.
    pub fn pad_front(&self, depth: usize) -> Network {
        let extra = depth.saturating_sub(self.depth());
        let id = Matrix::identity(self.input_dim());
        let weights = std::iter::repeat_n(id, extra)
            .chain(self.weights.iter().cloned())
            .collect();
        Network {
            activation: self.activation.clone(),
            weights,
            meta: self.meta.clone(),
        }
    }

    /// Adds `w` as the new first matrix (an activation separates it from the old first layer).
    pub fn prepend_layer(&self, w: Matrix) -> Result<Network> {
        if w.rows() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                layer: 0,
                expected: self.input_dim(),
                got: w.rows(),
            });
        }
        let weights = std::iter::once(w).chain(self.weights.iter().cloned()).collect();
        Ok(Network::new(self.activation.clone(), weights)?.with_meta_map(self.meta.clone()))
    }

    /// Adds `w` as the new output matrix.
    pub fn append_layer(&self, w: Matrix) -> Result<Network> {
        if w.cols() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                layer: self.weights.len(),
                expected: self.output_dim(),
                got: w.cols(),
            });
        }
        let mut weights = self.weights.clone();
        weights.push(w);
        Ok(Network::new(self.activation.clone(), weights)?.with_meta_map(self.meta.clone()))
    }

    /// Reorders output channels: output `i` becomes old output `perm[i]`.
    pub fn permute_outputs(&self, perm: &[usize]) -> Network {
        let mut out = self.clone();
        let last = out.weights.len() - 1;
        out.weights[last] = out.weights[last].permute_rows(perm);
        out
    }

    /// Replaces all weights, keeping activation and metadata. Used by training.
    pub fn with_weights(&self, weights: Vec<Matrix>) -> Result<Network> {
        Ok(Network::new(self.activation.clone(), weights)?.with_meta_map(self.meta.clone()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Network> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Reusable evaluator for repeated evaluation on grids.
///
/// Products run over the stored nonzero weights in the same left-to-right
/// order as [`Network::eval`], so both paths return bit-identical results.
pub struct Evaluator<'a> {
    net: &'a Network,
}

impl<'a> Evaluator<'a> {
    fn new(net: &'a Network) -> Self {
        Self { net }
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    /// Panics if `x` has the wrong length; intended for validated grids.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.net.input_dim(), "input length");
        let act = &self.net.activation;
        let mut cur: Vec<f64> = x.to_vec();
        let mut next = Vec::new();
        for (i, w) in self.net.weights.iter().enumerate() {
            if i > 0 {
                for v in cur.iter_mut() {
                    *v = act.apply(*v);
                }
            }
            w.mul_vec_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn eval_single_linear_layer() {
        let net = Network::new(ActivationKind::Identity, vec![m(&[&[2.0, 3.0]])]).unwrap();
        assert_eq!(net.eval(&[1.0, 1.0]).unwrap(), vec![5.0]);
        assert_eq!(net.depth(), 0);
    }

    #[test]
    fn eval_abs_between_layers_only() {
        let net = Network::new(ActivationKind::Abs, vec![m(&[&[-1.0]]), m(&[&[1.0]])]).unwrap();
        assert_eq!(net.eval(&[0.7]).unwrap(), vec![0.7]);
        let neg = Network::new(ActivationKind::Abs, vec![m(&[&[-1.0]])]).unwrap();
        assert_eq!(neg.eval(&[0.7]).unwrap(), vec![-0.7]);
    }

    #[test]
    fn eval_reports_offending_layer() {
        let net = Network::new(ActivationKind::Abs, vec![m(&[&[1.0, 2.0]])]).unwrap();
        assert_eq!(
            net.eval(&[1.0]).unwrap_err(),
            Error::DimensionMismatch {
                layer: 0,
                expected: 2,
                got: 1
            }
        );
        let bad = Network::new(ActivationKind::Abs, vec![m(&[&[1.0, 2.0]]), m(&[&[1.0, 1.0]])]);
        assert!(matches!(bad, Err(Error::DimensionMismatch { layer: 1, .. })));
        assert!(matches!(
            Network::new(ActivationKind::Abs, vec![]),
            Err(Error::EmptyNetwork)
        ));
    }

    #[test]
    fn path_matrix_and_norms() {
        let single = Network::new(ActivationKind::Abs, vec![m(&[&[-2.0, 3.0]])]).unwrap();
        assert_eq!(single.path_matrix().to_rows(), vec![vec![2.0, 3.0]]);
        let two = Network::new(ActivationKind::Abs, vec![m(&[&[1.0, -1.0]])]).unwrap();
        assert_eq!(two.path_norm(), 2.0);
        let net = Network::new(ActivationKind::Abs, vec![m(&[&[1.0, -1.0]]), m(&[&[0.5]])]).unwrap();
        assert_eq!(net.l1_param_norm(), 2.5);
        assert_eq!(net.per_layer_l1(), vec![2.0, 0.5]);
    }

    #[test]
    fn parallel_of_three_copies_is_block_diagonal() {
        let mat = m(&[&[1.0, -2.0], &[0.5, 3.0]]);
        let one = Network::new(ActivationKind::Abs, vec![mat.clone()]).unwrap();
        let par = Network::parallel(&[one.clone(), one.clone(), one]).unwrap();
        assert_eq!(par.weights()[0], Matrix::block_diag(&[&mat, &mat, &mat]));
    }

    #[test]
    fn compose_inserts_one_activation() {
        let id = Network::new(ActivationKind::Abs, vec![Matrix::identity(2)]).unwrap();
        let g = Network::new(ActivationKind::Abs, vec![m(&[&[1.0, -1.0]]), m(&[&[2.0]])]).unwrap();
        let c = Network::compose(&id, &g).unwrap();
        assert_eq!(c.depth(), g.depth() + 1);
        for x in [[0.2, 0.9], [1.0, 0.0], [0.5, 0.5]] {
            assert_eq!(c.eval(&x).unwrap(), g.eval(&x).unwrap());
        }
        let relu = Network::new(ActivationKind::Relu, vec![Matrix::identity(2)]).unwrap();
        assert!(matches!(
            Network::compose(&relu, &g),
            Err(Error::ActivationMismatch { .. })
        ));
        let wide = Network::new(ActivationKind::Abs, vec![Matrix::identity(3)]).unwrap();
        assert!(Network::compose(&wide, &g).is_err());
    }

    #[test]
    fn prepend_and_append_check_shapes() {
        let net = Network::new(ActivationKind::Abs, vec![m(&[&[1.0, 1.0]])]).unwrap();
        assert!(net.append_layer(m(&[&[2.0], &[3.0]])).is_ok());
        assert!(net.append_layer(m(&[&[2.0, 1.0]])).is_err());
        assert!(net.prepend_layer(Matrix::identity(2)).is_ok());
        assert!(net.prepend_layer(Matrix::identity(3)).is_err());
    }

    #[test]
    fn evaluator_matches_dense_eval_bitwise() {
        let net = Network::new(
            ActivationKind::Abs,
            vec![
                m(&[&[0.3, 0.0, -1.1], &[0.0, 0.0, 0.0], &[2.0, -0.7, 0.0]]),
                m(&[&[1.0, 0.0, -0.25], &[0.125, 3.0, 0.0]]),
                m(&[&[-0.5, 0.75]]),
            ],
        )
        .unwrap();
        let ev = net.evaluator();
        for i in 0..50 {
            let t = i as f64 / 7.0 - 3.0;
            let x = [t, 1.0 - t * 0.3, t * t * 0.1];
            assert_eq!(ev.eval(&x)[0].to_bits(), net.eval(&x).unwrap()[0].to_bits());
        }
    }

    #[test]
    fn json_round_trip_preserves_meta() {
        let net = Network::new(ActivationKind::Abs, vec![m(&[&[0.1, -1.0 / 3.0]])])
            .unwrap()
            .with_meta("construction", "test")
            .with_meta("m", 3);
        let text = net.to_json().unwrap();
        let back = Network::from_json(&text).unwrap();
        assert_eq!(back, net);
        let bad = r#"{"activation":"abs","weights":[[[1.0,2.0]],[[1.0,2.0,3.0]]]}"#;
        assert!(Network::from_json(bad).is_err());
    }
}
