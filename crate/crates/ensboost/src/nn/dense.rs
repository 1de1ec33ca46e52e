//! Sequential dense networks with hand-rolled reverse-mode gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mul_nn, mul_nt, mul_tn, Matrix};
use crate::rng::Rng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply<T: Scalar>(self, x: T) -> T {
        match self {
            Activation::Linear => x,
            Activation::Relu => {
                if x > T::zero() {
                    x
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative as a function of the pre-activation.
    #[inline]
    fn derivative<T: Scalar>(self, pre: T) -> T {
        match self {
            Activation::Linear => T::one(),
            Activation::Relu => {
                if pre > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => {
                let t = pre.tanh();
                T::one() - t * t
            }
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Linear => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Activation::Linear),
            1 => Ok(Activation::Relu),
            2 => Ok(Activation::Tanh),
            other => Err(Error::Format {
                offset: 0,
                msg: format!("unknown activation code {other}"),
            }),
        }
    }
}

/// One dense layer `y = act(W x + b)`; `weight` is `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub weight: Matrix<T>,
    pub bias: Vec<T>,
    pub activation: Activation,
}

impl<T: Scalar> Layer<T> {
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

/// Sequential dense network. Layer dimensions chain and every parameter is
/// finite; both are checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet<T> {
    layers: Vec<Layer<T>>,
    input_dim: usize,
    output_dim: usize,
}

/// Per-layer parameter gradients, congruent with the network's layers.
#[derive(Debug, Clone)]
pub struct NetGrads<T> {
    pub layers: Vec<(Matrix<T>, Vec<T>)>,
}

impl<T: Scalar> NetGrads<T> {
    pub fn zeros_like(net: &DenseNet<T>) -> Self {
        NetGrads {
            layers: net
                .layers
                .iter()
                .map(|l| (Matrix::zeros(l.out_dim(), l.in_dim()), vec![T::zero(); l.out_dim()]))
                .collect(),
        }
    }

    pub fn flat_slices(&self) -> Vec<&[T]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (w, b) in &self.layers {
            out.push(w.data());
            out.push(b.as_slice());
        }
        out
    }
}

/// Forward pass bookkeeping for the backward pass: the input batch and each
/// layer's pre-activations and activations.
#[derive(Debug)]
pub struct ForwardTrace<T> {
    input: Matrix<T>,
    pre: Vec<Matrix<T>>,
    post: Vec<Matrix<T>>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn output(&self) -> &Matrix<T> {
        self.post.last().unwrap_or(&self.input)
    }
}

impl<T: Scalar> DenseNet<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape(format!(
                    "layer dimensions do not chain: {} -> {}",
                    pair[0].out_dim(),
                    pair[1].in_dim()
                )));
            }
        }
        for (i, l) in layers.iter().enumerate() {
            if !l.weight.is_finite() || l.bias.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence(format!("non-finite parameter in layer {i}")));
            }
            if l.bias.len() != l.out_dim() {
                return Err(Error::Shape(format!("layer {i} bias length")));
            }
        }
        let input_dim = layers[0].in_dim();
        let output_dim = layers.last().unwrap().out_dim();
        Ok(DenseNet { layers, input_dim, output_dim })
    }

    /// Glorot-style init: weights uniform in `±sqrt(6/(fan_in+fan_out))`,
    /// biases zero. `dims` lists layer sizes input-first; hidden layers get
    /// `hidden_activation`, the final layer is linear.
    pub fn glorot(dims: &[usize], hidden_activation: Activation, rng: &mut Rng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Shape("need at least input and output dims".into()));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (idx, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data: Vec<T> = (0..fan_in * fan_out)
                .map(|_| T::of(rng.uniform_in(-bound, bound)))
                .collect();
            let activation = if idx + 2 == dims.len() { Activation::Linear } else { hidden_activation };
            layers.push(Layer {
                weight: Matrix::from_vec(fan_out, fan_in, data)?,
                bias: vec![T::zero(); fan_out],
                activation,
            });
        }
        DenseNet::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.data().len() + l.bias.len()).sum()
    }

    fn check_input(&self, batch: &Matrix<T>) -> Result<()> {
        if batch.cols() != self.input_dim {
            return Err(Error::Shape(format!(
                "batch has {} columns, network expects {}",
                batch.cols(),
                self.input_dim
            )));
        }
        Ok(())
    }

    pub fn forward(&self, batch: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_input(batch)?;
        let mut current = batch.clone();
        for layer in &self.layers {
            current = affine_activate(&current, layer);
        }
        Ok(current)
    }

    pub fn forward_trace(&self, batch: &Matrix<T>) -> Result<ForwardTrace<T>> {
        self.check_input(batch)?;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Matrix<T>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let input = if i == 0 { batch } else { &post[i - 1] };
            let mut p = mul_nt(input, &layer.weight);
            for r in 0..p.rows() {
                let row = p.row_mut(r);
                for (v, b) in row.iter_mut().zip(&layer.bias) {
                    *v += *b;
                }
            }
            let mut a = p.clone();
            a.data_mut().iter_mut().for_each(|v| *v = layer.activation.apply(*v));
            pre.push(p);
            post.push(a);
        }
        Ok(ForwardTrace { input: batch.clone(), pre, post })
    }

    /// Reverse-mode gradients for a traced forward pass. Returns parameter
    /// gradients and the gradient with respect to the input batch. Pure: the
    /// network is not mutated.
    pub fn backward_trace(
        &self,
        trace: &ForwardTrace<T>,
        upstream: &Matrix<T>,
    ) -> Result<(NetGrads<T>, Matrix<T>)> {
        let out = trace.output();
        if upstream.rows() != out.rows() || upstream.cols() != out.cols() {
            return Err(Error::Shape(format!(
                "upstream gradient is {}x{}, output is {}x{}",
                upstream.rows(),
                upstream.cols(),
                out.rows(),
                out.cols()
            )));
        }
        let mut grads = NetGrads::zeros_like(self);
        let mut delta = upstream.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            // delta w.r.t. pre-activation
            let pre = &trace.pre[idx];
            for r in 0..delta.rows() {
                let drow = delta.row_mut(r);
                let prow = pre.row(r);
                for (d, p) in drow.iter_mut().zip(prow) {
                    *d = *d * layer.activation.derivative(*p);
                }
            }
            let layer_input = if idx == 0 { &trace.input } else { &trace.post[idx - 1] };
            let dw = mul_tn(&delta, layer_input);
            let mut db = vec![T::zero(); layer.out_dim()];
            for r in 0..delta.rows() {
                for (acc, d) in db.iter_mut().zip(delta.row(r)) {
                    *acc += *d;
                }
            }
            grads.layers[idx] = (dw, db);
            delta = mul_nn(&delta, &layer.weight);
        }
        Ok((grads, delta))
    }

    /// Forward + backward in one call.
    pub fn backward(
        &self,
        batch: &Matrix<T>,
        upstream: &Matrix<T>,
    ) -> Result<(NetGrads<T>, Matrix<T>)> {
        let trace = self.forward_trace(batch)?;
        self.backward_trace(&trace, upstream)
    }
}

fn affine_activate<T: Scalar>(input: &Matrix<T>, layer: &Layer<T>) -> Matrix<T> {
    let mut out = mul_nt(input, &layer.weight);
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        for (v, b) in row.iter_mut().zip(&layer.bias) {
            *v = layer.activation.apply(*v + *b);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net_from(weight: Vec<f64>, rows: usize, cols: usize, bias: Vec<f64>, act: Activation) -> DenseNet<f64> {
        DenseNet::new(vec![Layer {
            weight: Matrix::from_vec(rows, cols, weight).unwrap(),
            bias,
            activation: act,
        }])
        .unwrap()
    }

    #[test]
    fn identity_layer_passes_through() {
        let net = net_from(vec![1.0, 0.0, 0.0, 1.0], 2, 2, vec![0.0, 0.0], Activation::Linear);
        let x = Matrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        assert_eq!(net.forward(&x).unwrap().data(), &[1.0, 2.0]);
    }

    #[test]
    fn hand_matrix_product() {
        let net = net_from(vec![2.0, 0.0, 0.0, 3.0], 2, 2, vec![1.0, -1.0], Activation::Linear);
        let x = Matrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        assert_eq!(net.forward(&x).unwrap().data(), &[3.0, 2.0]);
    }

    #[test]
    fn relu_clips_negative() {
        let net = net_from(vec![1.0, 0.0, 0.0, 1.0], 2, 2, vec![0.0, 0.0], Activation::Relu);
        let x = Matrix::from_vec(1, 2, vec![-5.0, 5.0]).unwrap();
        assert_eq!(net.forward(&x).unwrap().data(), &[0.0, 5.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let net = net_from(vec![1.0, 0.0], 1, 2, vec![0.0], Activation::Linear);
        let x = Matrix::from_vec(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(net.forward(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn scalar_product_rule() {
        // f(x) = w * x with w = 3, x = 2, upstream 1 => dw = 2, dx = 3
        let net = net_from(vec![3.0], 1, 1, vec![0.0], Activation::Linear);
        let x = Matrix::from_vec(1, 1, vec![2.0]).unwrap();
        let up = Matrix::from_vec(1, 1, vec![1.0]).unwrap();
        let (grads, dx) = net.backward(&x, &up).unwrap();
        assert_eq!(grads.layers[0].0.data(), &[2.0]);
        assert_eq!(dx.data(), &[3.0]);
    }

    #[test]
    fn zero_upstream_zero_grads() {
        let mut rng = Rng::new(1);
        let net = DenseNet::<f64>::glorot(&[3, 5, 2], Activation::Relu, &mut rng).unwrap();
        let x = Matrix::from_vec(2, 3, rng.standard_normal_vec(6)).unwrap();
        let up = Matrix::zeros(2, 2);
        let (grads, dx) = net.backward(&x, &up).unwrap();
        for (w, b) in &grads.layers {
            assert!(w.data().iter().all(|v| *v == 0.0));
            assert!(b.iter().all(|v| *v == 0.0));
        }
        assert!(dx.data().iter().all(|v| *v == 0.0));
    }

    /// Finite-difference oracle: gradient of the summed outputs of random
    /// 3-layer nets against central differences, h = 1e-4.
    #[test]
    fn gradient_matches_finite_differences() {
        for (seed, act) in [(11u64, Activation::Relu), (12, Activation::Tanh)] {
            let mut rng = Rng::new(seed);
            let mut net = DenseNet::<f64>::glorot(&[4, 6, 5, 3], act, &mut rng).unwrap();
            let x = Matrix::from_vec(3, 4, rng.standard_normal_vec(12)).unwrap();
            let up = {
                let out = net.forward(&x).unwrap();
                let mut u = Matrix::zeros(out.rows(), out.cols());
                u.data_mut().iter_mut().for_each(|v| *v = 1.0);
                u
            };
            let (grads, _) = net.backward(&x, &up).unwrap();

            let loss = |net: &DenseNet<f64>| -> f64 { net.forward(&x).unwrap().data().iter().sum() };
            let h = 1e-4;
            let mut checked = 0usize;
            for layer_idx in 0..net.layers().len() {
                for k in 0..net.layers()[layer_idx].weight.data().len() {
                    if rng.uniform() > 0.35 {
                        continue;
                    }
                    let orig = net.layers()[layer_idx].weight.data()[k];
                    net.layers_mut()[layer_idx].weight.data_mut()[k] = orig + h;
                    let up_val = loss(&net);
                    net.layers_mut()[layer_idx].weight.data_mut()[k] = orig - h;
                    let down = loss(&net);
                    net.layers_mut()[layer_idx].weight.data_mut()[k] = orig;
                    let fd = (up_val - down) / (2.0 * h);
                    let an = grads.layers[layer_idx].0.data()[k];
                    let denom = fd.abs().max(an.abs()).max(1e-8);
                    assert!(
                        (fd - an).abs() / denom <= 1e-4,
                        "seed {seed} layer {layer_idx} coord {k}: fd {fd} vs analytic {an}"
                    );
                    checked += 1;
                }
            }
            assert!(checked >= 100, "only {checked} coordinates checked");
        }
    }
}
