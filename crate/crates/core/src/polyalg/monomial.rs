use std::cmp::Ordering;

/// Exponent vector over the full universe, one slot per variable.
///
/// Comparison is graded-lexicographic: lower total degree first, then within
/// a degree the monomial with the larger leading exponent sorts first, so the
/// ascending order reads `1, x1, x2, x1^2, x1*x2, x2^2, ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    /// The constant monomial `1` over `nvars` slots.
    pub fn one(nvars: usize) -> Self {
        Monomial { exps: vec![0; nvars] }
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    /// Single variable `slot` raised to `exp`.
    pub fn var(nvars: usize, slot: usize, exp: u32) -> Self {
        let mut exps = vec![0; nvars];
        exps[slot] = exp;
        Monomial { exps }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn num_vars(&self) -> usize {
        self.exps.len()
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn degree_in(&self, slot: usize) -> u32 {
        self.exps[slot]
    }

    /// Total degree over a subset of slots.
    pub fn degree_over<F: Fn(usize) -> bool>(&self, included: F) -> u32 {
        self.exps
            .iter()
            .enumerate()
            .filter(|(s, _)| included(*s))
            .map(|(_, e)| e)
            .sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Divide by `x_slot^k`; panics if the exponent is too small.
    pub fn div_var(&self, slot: usize, k: u32) -> Monomial {
        let mut exps = self.exps.clone();
        assert!(exps[slot] >= k);
        exps[slot] -= k;
        Monomial { exps }
    }

    pub fn mul_var(&self, slot: usize, k: u32) -> Monomial {
        let mut exps = self.exps.clone();
        exps[slot] += k;
        Monomial { exps }
    }

    /// Evaluate at a point (one coordinate per slot).
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.exps.len());
        self.exps
            .iter()
            .zip(point)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
