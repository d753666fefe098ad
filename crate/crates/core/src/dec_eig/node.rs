use crate::linalg::{norm_sq, C64};

/// Everything node `k` knows: its own samples, its component of the
/// current iterate, and its local copies of the recursion scalars.
///
/// The state never sees another node's row; cross-node information arrives
/// only through the consensus views passed to the update methods.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    pub id: usize,
    samples: Vec<C64>,
    nodes: usize,
    /// `v(j)[k]`
    pub v_cur: C64,
    /// `v(j−1)[k]`
    pub v_prev: C64,
    /// `w(j)[k]` (Lanczos only)
    pub w: C64,
    /// `α(1..j)[k]`
    pub alpha_hist: Vec<f64>,
    /// `β(1..j)[k]`, with `β(1) = 0`
    pub beta_hist: Vec<f64>,
    pub lambda_est: Vec<f64>,
    /// Set once a scalar consensus returned a negative `|w|²` mean.
    pub clamped: bool,
    /// Lanczos size at which this node detected breakdown.
    pub frozen_at: Option<usize>,
}

impl NodeState {
    pub fn new(id: usize, samples: &[C64], nodes: usize, v0: C64) -> Self {
        Self {
            id,
            samples: samples.to_vec(),
            nodes,
            v_cur: v0,
            v_prev: C64::new(0.0, 0.0),
            w: C64::new(0.0, 0.0),
            alpha_hist: Vec::new(),
            beta_hist: vec![0.0],
            lambda_est: Vec::new(),
            clamped: false,
            frozen_at: None,
        }
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    fn k(&self) -> f64 {
        self.nodes as f64
    }

    fn n(&self) -> f64 {
        self.samples.len() as f64
    }

    /// Row contributed to the width-N consensus: `v(j)[k]* · y_kᵀ`.
    pub fn vector_input(&self) -> Vec<C64> {
        let c = self.v_cur.conj();
        self.samples.iter().map(|y| c * y).collect()
    }

    /// `(K/N) · z[k]ᴴ y_k`, the node's component of `R v`.
    pub fn local_product(&self, z: &[C64]) -> C64 {
        let s: C64 = z.iter().zip(&self.samples).map(|(a, y)| a.conj() * y).sum();
        s * (self.k() / self.n())
    }

    /// `(K²/N) ‖z[k]‖²`.
    pub fn local_quadratic(&self, z: &[C64]) -> f64 {
        norm_sq(z) * self.k() * self.k() / self.n()
    }

    /// Power-method step: `v(j)[k] = (K/N) z[k]ᴴ y_k`.
    pub fn power_step(&mut self, z: &[C64]) {
        let next = self.local_product(z);
        self.v_prev = self.v_cur;
        self.v_cur = next;
    }

    /// `λ̂1[k] = (K/N) ‖z[k]‖² / d[k]`; `None` when `d[k] = 0`.
    pub fn rayleigh_estimate(&self, z: &[C64], d: C64) -> Option<f64> {
        let den = d.norm_sqr();
        if den == 0.0 {
            return None;
        }
        let num = norm_sq(z) * self.k() / self.n();
        Some(num * d.re / den)
    }

    /// First half of a Lanczos step: `α(j)[k]` and `w(j)[k]` from the view `z`.
    pub fn lanczos_residual(&mut self, z: &[C64]) {
        let alpha = self.local_quadratic(z);
        let beta = *self.beta_hist.last().expect("β(1) is always present");
        self.alpha_hist.push(alpha);
        self.w = self.local_product(z) - self.v_cur * alpha - self.v_prev * beta;
    }

    /// Second half: `β(j+1)[k] = sqrt(K·b[k])`, negative `b` clamped to 0.
    pub fn lanczos_beta(&mut self, b: C64) -> f64 {
        let mut b = b.re;
        if b < 0.0 {
            b = 0.0;
            self.clamped = true;
        }
        (self.k() * b).sqrt()
    }

    /// Advances to `v(j+1)[k] = w(j)[k]/β(j+1)[k]`.
    pub fn lanczos_advance(&mut self, beta: f64) {
        self.beta_hist.push(beta);
        self.v_prev = self.v_cur;
        self.v_cur = self.w / beta;
    }

    /// Stops contributing after breakdown; the node's `T` stays at its size.
    pub fn freeze(&mut self) {
        self.frozen_at = Some(self.alpha_hist.len());
        self.v_prev = self.v_cur;
        self.v_cur = C64::new(0.0, 0.0);
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen_at.is_some()
    }
}
