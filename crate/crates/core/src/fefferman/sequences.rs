//! The sequences a₁ = 1, a_{k+1} = 2^{−k/a_k} and λ_k = 1/a_{k+1}.
//!
//! Every a_k is a power of two, so the recursion runs exactly on base-2
//! logarithms; values are materialized only where a double can hold them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Exact,
    /// Too small for a double (would flush to zero).
    Underflow,
    /// Too large for a double.
    Overflow,
    /// Even the base-2 exponent exceeds double range.
    ExponentOverflow,
}

/// A power of two 2^e, possibly outside double range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerOfTwo {
    /// The exponent e; ±∞ when not representable.
    pub log2: f64,
    pub value: Option<f64>,
    pub representation: Representation,
}

impl PowerOfTwo {
    fn from_log2(e: f64) -> Self {
        if !e.is_finite() {
            return Self { log2: e, value: None, representation: Representation::ExponentOverflow };
        }
        if e < -1074.0 {
            return Self { log2: e, value: None, representation: Representation::Underflow };
        }
        if e > 1023.0 {
            return Self { log2: e, value: None, representation: Representation::Overflow };
        }
        Self { log2: e, value: Some(e.exp2()), representation: Representation::Exact }
    }

    pub fn is_exact(&self) -> bool {
        self.representation == Representation::Exact
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceTerm {
    pub k: usize,
    pub a: PowerOfTwo,
    pub lambda: PowerOfTwo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSequences {
    pub terms: Vec<SequenceTerm>,
}

impl CounterexampleSequences {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// a_k as a double, or an error naming the representation problem.
    pub fn a(&self, k: usize) -> Result<f64> {
        let t = self.term(k)?;
        t.a.value.ok_or_else(|| Error::Unrepresentable(format!("a_{k} ({:?})", t.a.representation)))
    }

    /// λ_k as a double, or an error naming the representation problem.
    pub fn lambda(&self, k: usize) -> Result<f64> {
        let t = self.term(k)?;
        t.lambda.value.ok_or_else(|| Error::Unrepresentable(format!("lambda_{k} ({:?})", t.lambda.representation)))
    }

    fn term(&self, k: usize) -> Result<&SequenceTerm> {
        if k == 0 || k > self.terms.len() {
            return Err(Error::arg(format!("index {k} outside 1..={}", self.terms.len())));
        }
        Ok(&self.terms[k - 1])
    }

    /// Rechecks λ_k·a_{k+1} = 1 and a_{k+1} = 2^{−k/a_k} wherever both sides are
    /// doubles, and in log2 that a decreases strictly and λ_{k+1} ≥ 4λ_k.
    pub fn identities_hold(&self) -> bool {
        let n = self.terms.len();
        (0..n).all(|i| {
            let k = i + 1;
            let lam = self.terms[i].lambda;
            let next_a_log2 = -lam.log2;
            let lam_ok = match (lam.value, PowerOfTwo::from_log2(next_a_log2).value) {
                (Some(l), Some(a)) => l * a == 1.0,
                _ => true,
            };
            let rec_ok = match (self.terms[i].a.value, PowerOfTwo::from_log2(next_a_log2).value) {
                (Some(ak), Some(ak1)) => ak1 == (-(k as f64) / ak).exp2(),
                _ => true,
            };
            lam_ok && rec_ok
        }) && self.terms.windows(2).all(|w| {
            w[1].a.log2 < w[0].a.log2 && w[1].lambda.log2 - w[0].lambda.log2 >= 2.0
        })
    }
}

/// The first `k` terms of (a_k) and (λ_k).
pub fn counterexample_sequences(k: usize) -> Result<CounterexampleSequences> {
    if k == 0 {
        return Err(Error::arg("sequence length must be at least 1"));
    }
    // log2 a_{j+1} = −j / a_j = −j · 2^{−log2 a_j}
    let mut log2_a = vec![0.0f64];
    for j in 1..=k {
        let prev = log2_a[j - 1];
        log2_a.push(-(j as f64) * (-prev).exp2());
    }
    let terms = (1..=k)
        .map(|j| SequenceTerm {
            k: j,
            a: PowerOfTwo::from_log2(log2_a[j - 1]),
            lambda: PowerOfTwo::from_log2(-log2_a[j]),
        })
        .collect();
    Ok(CounterexampleSequences { terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let s = counterexample_sequences(5).unwrap();
        assert_eq!(s.a(1).unwrap(), 1.0);
        assert_eq!(s.a(2).unwrap(), 0.5);
        assert_eq!(s.a(3).unwrap(), 1.0 / 16.0);
        assert_eq!(s.a(4).unwrap(), 2f64.powi(-48));
        assert_eq!(s.lambda(1).unwrap(), 2.0);
        assert_eq!(s.lambda(2).unwrap(), 16.0);
        assert_eq!(s.lambda(3).unwrap(), 2f64.powi(48));
        assert!(matches!(s.lambda(4), Err(Error::Unrepresentable(_))));
        assert_eq!(s.terms[3].lambda.representation, Representation::Overflow);
        assert_eq!(s.terms[3].lambda.log2, 2f64.powi(50));
        assert_eq!(s.terms[4].a.representation, Representation::Underflow);
        assert!(matches!(s.a(5), Err(Error::Unrepresentable(_))));
        assert_eq!(s.terms[4].lambda.representation, Representation::ExponentOverflow);
        assert!(s.identities_hold());
        assert!(counterexample_sequences(0).is_err());
    }
}
