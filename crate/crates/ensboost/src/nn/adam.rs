//! Adaptive-moment optimizer with bias correction and a cosine schedule.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Decay constants are fixed (0.9 / 0.999, epsilon 1e-8).
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LrSchedule {
    Constant,
    /// `base_lr * 0.5 * (1 + cos(pi * t / total_steps))`; monotone
    /// non-increasing, zero at and beyond `total_steps`.
    Cosine { total_steps: usize },
}

impl LrSchedule {
    pub fn lr_at(&self, base_lr: f64, step: usize) -> f64 {
        match *self {
            LrSchedule::Constant => base_lr,
            LrSchedule::Cosine { total_steps } => {
                if total_steps == 0 || step >= total_steps {
                    0.0
                } else {
                    base_lr * 0.5 * (1.0 + (std::f64::consts::PI * step as f64 / total_steps as f64).cos())
                }
            }
        }
    }
}

/// First/second moment accumulators congruent with the parameter slices
/// passed to [`Adam::step`]; single-owner, one trainer mutates it.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    step_count: usize,
    base_lr: f64,
    schedule: LrSchedule,
}

impl<T: Scalar> Adam<T> {
    pub fn new(base_lr: f64, schedule: LrSchedule) -> Self {
        Adam { m: Vec::new(), v: Vec::new(), step_count: 0, base_lr, schedule }
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// Learning rate that the next `step` call will use.
    pub fn next_lr(&self) -> f64 {
        self.schedule.lr_at(self.base_lr, self.step_count)
    }

    /// One update over a flattened parameter list. `names` label each slice
    /// for divergence diagnostics. Accumulators are allocated on first use
    /// and must stay congruent afterwards.
    pub fn step(&mut self, params: &mut [&mut [T]], grads: &[&[T]], names: &[&str]) -> Result<()> {
        if params.len() != grads.len() || params.len() != names.len() {
            return Err(Error::Shape(format!(
                "optimizer got {} parameter slices, {} gradient slices, {} names",
                params.len(),
                grads.len(),
                names.len()
            )));
        }
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![T::zero(); p.len()]).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != params.len() {
            return Err(Error::Shape("optimizer state does not mirror parameters".into()));
        }
        for ((slot, p), (g, name)) in
            self.m.iter().zip(params.iter()).zip(grads.iter().zip(names.iter()))
        {
            if slot.len() != p.len() || p.len() != g.len() {
                return Err(Error::Shape(format!("shape drift in parameter `{name}`")));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence(format!("non-finite gradient in `{name}`")));
            }
        }

        let lr = T::of(self.schedule.lr_at(self.base_lr, self.step_count));
        self.step_count += 1;
        let t = self.step_count as i32;
        let (b1, b2, eps) = (T::of(BETA1), T::of(BETA2), T::of(EPSILON));
        let bias1 = T::one() - b1.powi(t);
        let bias2 = T::one() - b2.powi(t);

        for ((m, v), (p, g)) in self
            .m
            .iter_mut()
            .zip(self.v.iter_mut())
            .zip(params.iter_mut().zip(grads.iter()))
        {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut opt = Adam::<f64>::new(0.01, LrSchedule::Constant);
        let mut p = vec![1.0, -2.0];
        let g = vec![0.5, -0.25];
        opt.step(&mut [&mut p], &[&g], &["p"]).unwrap();
        assert!((p[0] - (1.0 - 0.01)).abs() < 1e-6, "{}", p[0]);
        assert!((p[1] - (-2.0 + 0.01)).abs() < 1e-6, "{}", p[1]);
        assert_eq!(opt.step_count(), 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut opt = Adam::<f64>::new(0.01, LrSchedule::Constant);
        let mut p = vec![1.5, -0.5, 3.0];
        let g = vec![0.0; 3];
        for _ in 0..10 {
            opt.step(&mut [&mut p], &[&g], &["p"]).unwrap();
        }
        assert_eq!(p, vec![1.5, -0.5, 3.0]);
    }

    #[test]
    fn cosine_schedule_endpoints_and_midpoint() {
        let s = LrSchedule::Cosine { total_steps: 100 };
        assert_eq!(s.lr_at(1e-4, 0), 1e-4);
        assert!((s.lr_at(1e-4, 50) - 5e-5).abs() < 1e-18);
        assert!(s.lr_at(1e-4, 100).abs() < 1e-18);
        // monotone non-increasing
        let mut prev = f64::INFINITY;
        for t in 0..=100 {
            let lr = s.lr_at(1e-4, t);
            assert!(lr <= prev + 1e-18);
            prev = lr;
        }
    }

    #[test]
    fn non_finite_gradient_names_the_parameter() {
        let mut opt = Adam::<f64>::new(0.01, LrSchedule::Constant);
        let mut p = vec![1.0];
        let g = vec![f64::NAN];
        let err = opt.step(&mut [&mut p], &[&g], &["encoder.l0.weight"]).unwrap_err();
        match err {
            Error::Divergence(msg) => assert!(msg.contains("encoder.l0.weight")),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
