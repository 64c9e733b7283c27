use serde::{Deserialize, Serialize};

/// Whether the logarithmic factors carry the outer `log`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogForm {
    /// `log(32 HSA i^2 / delta)`.
    #[default]
    Log,
    /// `32 HSA i^2 / delta` with no outer log, kept for compatibility.
    Raw,
}

/// `l1(i, delta)` and `l2(k, delta)` for an instance of size `H x S x A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogFactors {
    pub horizon: usize,
    pub states: usize,
    pub actions: usize,
    pub form: LogForm,
}

impl LogFactors {
    pub fn new(horizon: usize, states: usize, actions: usize) -> Self {
        LogFactors {
            horizon,
            states,
            actions,
            form: LogForm::Log,
        }
    }

    pub fn with_form(mut self, form: LogForm) -> Self {
        self.form = form;
        self
    }

    /// `32 H S A`.
    pub fn base(&self) -> f64 {
        32.0 * (self.horizon * self.states * self.actions) as f64
    }

    fn finish(&self, arg: f64) -> f64 {
        match self.form {
            LogForm::Log => arg.ln(),
            LogForm::Raw => arg,
        }
    }

    pub fn ell1(&self, i: u64, delta: f64) -> f64 {
        let i = i as f64;
        self.finish(self.base() * i * i / delta)
    }

    pub fn ell2(&self, k: u64, delta: f64) -> f64 {
        let inner = 2.0 + (k as f64 * self.horizon as f64).ln();
        self.finish(self.base() * inner * inner / delta)
    }

    /// `log(K H)`.
    pub fn log_kh(&self, k: u64) -> f64 {
        (k as f64 * self.horizon as f64).ln()
    }

    pub fn sa(&self) -> f64 {
        (self.states * self.actions) as f64
    }
}
