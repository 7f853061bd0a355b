//! Uniform time grids.


/// Uniform time grid with `steps + 1` sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    start: f64,
    step: f64,
    steps: usize,
}

impl Grid {
    /// Grid starting at `start` with `steps` intervals of width `step`.
    ///
    /// Panics if `step` is not positive and finite.
    pub fn from_step(start: f64, step: f64, steps: usize) -> Self {
        assert!(step > 0.0 && step.is_finite(), "grid step must be positive");
        Self { start, step, steps }
    }

    /// Grid spanning `[start, end]` with `steps` equal intervals.
    pub fn span(start: f64, end: f64, steps: usize) -> Self {
        assert!(steps > 0, "grid needs at least one interval");
        Self::from_step(start, (end - start) / steps as f64, steps)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of intervals (one less than the number of samples).
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of sample points.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> f64 {
        self.time(self.steps)
    }

    /// Sample time `t_k = start + k * step`.
    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Same span sampled `factor` times more densely.
    pub fn refined(&self, factor: usize) -> Self {
        assert!(factor > 0);
        Self {
            start: self.start,
            step: self.step / factor as f64,
            steps: self.steps * factor,
        }
    }
}
