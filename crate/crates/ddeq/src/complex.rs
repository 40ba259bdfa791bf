//! Canonical complex numbers with tolerance-based identification.
//!
//! Every weight stored in a decision diagram is a [`CVal`] — an index into a
//! [`ComplexTable`]. Two values whose components differ by less than the
//! table's epsilon are collapsed onto the same canonical entry, so structural
//! equality of diagrams survives floating-point noise and node comparison is a
//! plain integer comparison.

use num_complex::Complex64;
use std::collections::HashMap;

/// Default identification tolerance. Large enough to absorb `1/sqrt(2)`
/// rounding chains over thousands of gates, small enough to keep T-gate
/// phases apart.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Handle to a canonical complex value inside a [`ComplexTable`].
///
/// Equality of handles is equality of canonical values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CVal(u32);

impl CVal {
    /// Canonical zero, pre-seeded and exact.
    pub const ZERO: CVal = CVal(0);
    /// Canonical one, pre-seeded and exact.
    pub const ONE: CVal = CVal(1);
    /// Canonical `1/sqrt(2)`, pre-seeded and exact.
    pub const SQRT2_INV: CVal = CVal(2);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_exact_zero(self) -> bool {
        self == CVal::ZERO
    }

    pub fn is_exact_one(self) -> bool {
        self == CVal::ONE
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NumericsError {
    #[error("non-finite complex component ({re}, {im})")]
    NonFiniteValue { re: f64, im: f64 },
    #[error("epsilon {0} is not a finite positive number")]
    InvalidEpsilon(f64),
}

/// Lookup table mapping `(re, im)` pairs onto canonical [`CVal`] instances.
///
/// Values are bucketed by `round(component / epsilon)`; a lookup probes the
/// bucket of its key and the eight neighbouring buckets, so identification
/// does not split at bucket borders. Entries are never removed.
#[derive(Debug, Clone)]
pub struct ComplexTable {
    epsilon: f64,
    values: Vec<Complex64>,
    buckets: HashMap<(i64, i64), Vec<u32>>,
}

impl Default for ComplexTable {
    fn default() -> Self {
        Self::new()
    }
}

impl ComplexTable {
    pub fn new() -> Self {
        Self::with_epsilon(DEFAULT_EPSILON).expect("default epsilon is valid")
    }

    pub fn with_epsilon(epsilon: f64) -> Result<Self, NumericsError> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(NumericsError::InvalidEpsilon(epsilon));
        }
        let mut table = ComplexTable {
            epsilon,
            values: Vec::with_capacity(64),
            buckets: HashMap::new(),
        };
        // Seed order fixes the indices of the `CVal` constants.
        table.insert(Complex64::new(0.0, 0.0));
        table.insert(Complex64::new(1.0, 0.0));
        table.insert(Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        Ok(table)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of distinct canonical values currently stored.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the seeded constants are always present
    }

    // The float-to-int cast saturates, so extreme magnitudes land in the
    // outermost buckets instead of overflowing.
    fn bucket_key(&self, re: f64, im: f64) -> (i64, i64) {
        ((re / self.epsilon).round() as i64, (im / self.epsilon).round() as i64)
    }

    fn insert(&mut self, value: Complex64) -> CVal {
        let id = self.values.len() as u32;
        self.values.push(value);
        let key = self.bucket_key(value.re, value.im);
        self.buckets.entry(key).or_default().push(id);
        CVal(id)
    }

    /// Returns the canonical instance within epsilon of `(re, im)`,
    /// inserting a new entry if none exists yet.
    pub fn lookup(&mut self, re: f64, im: f64) -> Result<CVal, NumericsError> {
        if !re.is_finite() || !im.is_finite() {
            return Err(NumericsError::NonFiniteValue { re, im });
        }
        let (br, bi) = self.bucket_key(re, im);
        for dr in [0i64, -1, 1] {
            for di in [0i64, -1, 1] {
                if let Some(ids) = self.buckets.get(&(br.saturating_add(dr), bi.saturating_add(di))) {
                    for &id in ids {
                        let v = self.values[id as usize];
                        if (v.re - re).abs() < self.epsilon && (v.im - im).abs() < self.epsilon {
                            return Ok(CVal(id));
                        }
                    }
                }
            }
        }
        Ok(self.insert(Complex64::new(re, im)))
    }

    pub fn lookup_complex(&mut self, z: Complex64) -> Result<CVal, NumericsError> {
        self.lookup(z.re, z.im)
    }

    pub fn value(&self, c: CVal) -> Complex64 {
        self.values[c.index()]
    }

    /// Component-wise comparison of two canonical values under epsilon.
    pub fn approx_eq(&self, a: CVal, b: CVal) -> bool {
        a == b || self.approx_eq_values(self.value(a), self.value(b))
    }

    pub fn approx_eq_values(&self, a: Complex64, b: Complex64) -> bool {
        (a.re - b.re).abs() < self.epsilon && (a.im - b.im).abs() < self.epsilon
    }

    pub fn is_approx_one(&self, c: CVal) -> bool {
        c.is_exact_one() || self.approx_eq_values(self.value(c), Complex64::new(1.0, 0.0))
    }

    /// True when the canonical value has modulus one within epsilon.
    pub fn is_unit_modulus(&self, c: CVal) -> bool {
        (self.value(c).norm() - 1.0).abs() < self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256StarStar;

    #[test]
    fn zero_lookup_is_seeded_zero() {
        let mut t = ComplexTable::new();
        assert_eq!(t.lookup(0.0, 0.0).unwrap(), CVal::ZERO);
        assert_eq!(t.value(CVal::ZERO), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn tolerance_collapses_onto_seeded_sqrt2_inv() {
        let mut t = ComplexTable::new();
        let c = t.lookup(std::f64::consts::FRAC_1_SQRT_2 + 1e-12, 0.0).unwrap();
        assert_eq!(c, CVal::SQRT2_INV);
        // Seeded constant survives the round-trip bit-exactly.
        assert_eq!(t.value(c).re.to_bits(), std::f64::consts::FRAC_1_SQRT_2.to_bits());
    }

    #[test]
    #[allow(clippy::approx_constant)] // the literal under test is the point
    fn canonical_phase_matches_library_trig() {
        let mut t = ComplexTable::new();
        // e^{-i pi/4}
        let c = t.lookup(0.7071067811865476, -0.7071067811865476).unwrap();
        let v = t.value(c);
        let expect = Complex64::new((std::f64::consts::PI / 4.0).cos(), -(std::f64::consts::PI / 4.0).sin());
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn non_finite_rejected() {
        let mut t = ComplexTable::new();
        assert!(matches!(
            t.lookup(f64::NAN, 0.0),
            Err(NumericsError::NonFiniteValue { .. })
        ));
        assert!(t.lookup(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn approx_eq_cases() {
        let mut t = ComplexTable::new();
        let one = t.lookup(1.0, 0.0).unwrap();
        assert!(t.approx_eq(one, CVal::ONE));
        let off = t.lookup(1.0 + 2.0 * DEFAULT_EPSILON, 0.0).unwrap();
        assert!(!t.approx_eq(one, off));
        // omega = (1+i)/sqrt(2)
        let omega = t
            .lookup(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
            .unwrap();
        let trig = t
            .lookup((std::f64::consts::PI / 4.0).cos(), (std::f64::consts::PI / 4.0).sin())
            .unwrap();
        assert!(t.approx_eq(omega, trig));
    }

    #[test]
    fn lookup_idempotent_for_random_inputs() {
        let mut t = ComplexTable::new();
        let mut rng = Xoshiro256StarStar::seeded(0xD1CE);
        for _ in 0..1_000_000 {
            let re = rng.next_f64_signed();
            let im = rng.next_f64_signed();
            let a = t.lookup(re, im).unwrap();
            let v = t.value(a);
            let b = t.lookup(v.re, v.im).unwrap();
            assert_eq!(a, b);
        }
    }
}
