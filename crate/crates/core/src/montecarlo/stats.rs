//! Streaming moment accumulators with pairwise (Chan et al.) merging.

use crate::scalar::Real;

/// Count, mean and centered sum of squares of a scalar stream.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments<T> {
    pub count: u64,
    pub mean: T,
    pub m2: T,
}

impl<T: Real> Moments<T> {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    #[inline]
    pub fn push(&mut self, x: T) {
        self.count += 1;
        let n = T::lit(self.count as f64);
        let delta = x - self.mean;
        self.mean = self.mean + delta / n;
        self.m2 = self.m2 + delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = T::lit(self.count as f64);
        let nb = T::lit(other.count as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        self.mean = self.mean + delta * nb / n;
        self.m2 = self.m2 + other.m2 + delta * delta * na * nb / n;
        self.count += other.count;
    }

    /// Unbiased sample variance (`M − 1` denominator); zero below two
    /// samples.
    pub fn variance(&self) -> T {
        if self.count < 2 {
            return T::zero();
        }
        (self.m2 / T::lit((self.count - 1) as f64)).max(T::zero())
    }

    /// Sample mean of `x²`.
    pub fn mean_square(&self) -> T {
        if self.count == 0 {
            return T::zero();
        }
        self.m2 / T::lit(self.count as f64) + self.mean * self.mean
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> T {
        if self.count == 0 {
            return T::zero();
        }
        (self.variance() / T::lit(self.count as f64)).sqrt()
    }
}

/// Joint moments of a pair stream `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoMoments<T> {
    pub count: u64,
    pub mean_x: T,
    pub mean_y: T,
    pub m2_x: T,
    pub m2_y: T,
    pub c_xy: T,
}

impl<T: Real> CoMoments<T> {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean_x: T::zero(),
            mean_y: T::zero(),
            m2_x: T::zero(),
            m2_y: T::zero(),
            c_xy: T::zero(),
        }
    }

    #[inline]
    pub fn push(&mut self, x: T, y: T) {
        self.count += 1;
        let n = T::lit(self.count as f64);
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x = self.mean_x + dx / n;
        self.mean_y = self.mean_y + dy / n;
        self.m2_x = self.m2_x + dx * (x - self.mean_x);
        self.m2_y = self.m2_y + dy * (y - self.mean_y);
        self.c_xy = self.c_xy + dx * (y - self.mean_y);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = T::lit(self.count as f64);
        let nb = T::lit(other.count as f64);
        let n = na + nb;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        let w = na * nb / n;
        self.mean_x = self.mean_x + dx * nb / n;
        self.mean_y = self.mean_y + dy * nb / n;
        self.m2_x = self.m2_x + other.m2_x + dx * dx * w;
        self.m2_y = self.m2_y + other.m2_y + dy * dy * w;
        self.c_xy = self.c_xy + other.c_xy + dx * dy * w;
        self.count += other.count;
    }

    fn denom(&self) -> Option<T> {
        (self.count >= 2).then(|| T::lit((self.count - 1) as f64))
    }

    pub fn var_x(&self) -> T {
        self.denom()
            .map_or(T::zero(), |d| (self.m2_x / d).max(T::zero()))
    }

    pub fn var_y(&self) -> T {
        self.denom()
            .map_or(T::zero(), |d| (self.m2_y / d).max(T::zero()))
    }

    pub fn cov(&self) -> T {
        self.denom().map_or(T::zero(), |d| self.c_xy / d)
    }
}
