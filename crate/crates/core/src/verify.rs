//! Invariant suite: algebraic identities of the square, the triple-state
//! split, and the structure of the perfect chain.

use serde::Serialize;

use crate::analysis::{noncontextual_maximum, CLASSICAL_BOUND};
use crate::chain::{effective_state, ProbabilityVector, TransitionMatrix};
use crate::quantum::{self, ContextId, SquareOperators, TripleState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_result(name: &'static str, result: Result<String, String>) -> Self {
        match result {
            Ok(detail) => Self { name, passed: true, detail },
            Err(detail) => Self { name, passed: false, detail },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{}  {:width$}  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out
    }
}

pub fn run_checks(square: &SquareOperators) -> VerifyReport {
    let mut checks = vec![
        Check::from_result(
            "observables",
            square
                .check_observables()
                .map(|_| "nine Hermitian operators with A^2 = 1".into())
                .map_err(|e| e.to_string()),
        ),
        Check::from_result(
            "commutation",
            square
                .check_commutation()
                .map(|_| "all context pairs commute".into())
                .map_err(|e| e.to_string()),
        ),
        Check::from_result("context products", context_products(square)),
    ];

    let states = quantum::all_triple_states(square);
    let chain = states.as_ref().map(|s| TransitionMatrix::from_triple_states(s));
    let dependent = |name, f: &dyn Fn() -> Result<String, String>| match &states {
        Ok(_) => Check::from_result(name, f()),
        Err(e) => Check::from_result(name, Err(format!("triple states unavailable: {e}"))),
    };

    checks.push(dependent("state split", &|| state_split(states.as_ref().unwrap())));
    checks.push(dependent("completeness", &|| completeness(states.as_ref().unwrap())));
    checks.push(dependent("matrix symmetry", &|| {
        let a = chain.as_ref().unwrap().asymmetry();
        if a <= 1e-12 {
            Ok(format!("max |T - T^t| = {a:e}"))
        } else {
            Err(format!("max |T - T^t| = {a:e}"))
        }
    }));
    checks.push(dependent("double stochasticity", &|| {
        let t = chain.as_ref().unwrap();
        let err = t.column_sum_error().max(t.row_sum_error());
        if err <= 1e-12 {
            Ok(format!("max |sum - 1| = {err:e}"))
        } else {
            Err(format!("max |sum - 1| = {err:e}"))
        }
    }));
    checks.push(dependent("spectrum", &|| spectrum(chain.as_ref().unwrap())));
    checks.push(dependent("stationary uniform", &|| {
        let pi = chain.as_ref().unwrap().stationary().map_err(|e| e.to_string())?;
        let worst = pi
            .as_slice()
            .iter()
            .map(|x| (x - 1.0 / 24.0).abs())
            .fold(0.0, f64::max);
        if worst <= 1e-12 {
            Ok("pi = 1/24 everywhere".into())
        } else {
            Err(format!("max |pi - 1/24| = {worst:e}"))
        }
    }));
    checks.push(dependent("effective state", &|| {
        let rho = effective_state(&ProbabilityVector::uniform(24), states.as_ref().unwrap())
            .map_err(|e| e.to_string())?;
        let err = rho.max_abs_diff(&quantum::maximally_mixed());
        if err <= 1e-12 {
            Ok("uniform mixture of triple states is 1/4".into())
        } else {
            Err(format!("deviates from 1/4 by {err:e}"))
        }
    }));
    let bound = noncontextual_maximum();
    checks.push(Check::from_result(
        "classical bound",
        if bound == CLASSICAL_BOUND {
            Ok("max over 512 assignments is 4".into())
        } else {
            Err(format!("max over 512 assignments is {bound}"))
        },
    ));

    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn context_products(square: &SquareOperators) -> Result<String, String> {
    square.check_products().map_err(|e| e.to_string())?;
    let parity: i8 = ContextId::all().map(|j| j.sign()).product();
    Ok(format!("+1 for j != 5, -1 for j = 5 (overall parity {parity})"))
}

fn state_split(states: &[TripleState]) -> Result<String, String> {
    let local = states.iter().filter(|s| quantum::is_product_state(&s.vector)).count();
    let entangled = states
        .iter()
        .filter(|s| quantum::is_maximally_entangled(&s.vector))
        .count();
    let msg = format!("{local} product, {entangled} maximally entangled");
    if (local, entangled) == (16, 8) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn completeness(states: &[TripleState]) -> Result<String, String> {
    let id = quantum::ComplexMatrix::identity(quantum::DIM);
    for chunk in states.chunks(4) {
        let sum = chunk
            .iter()
            .fold(quantum::ComplexMatrix::zeros(quantum::DIM), |acc, s| &acc + &s.projector);
        let err = sum.max_abs_diff(&id);
        if err > 1e-12 {
            return Err(format!(
                "context {} projectors miss the identity by {err:e}",
                chunk[0].context
            ));
        }
    }
    Ok("each context resolves the identity".into())
}

fn spectrum(chain: &TransitionMatrix) -> Result<String, String> {
    let s = chain.spectrum().map_err(|e| e.to_string())?;
    let counts = (s.multiplicity(1.0), s.multiplicity(1.0 / 3.0), s.multiplicity(0.0));
    let msg = format!("{{1 x{}, 1/3 x{}, 0 x{}}}", counts.0, counts.1, counts.2);
    if counts == (1, 9, 14) {
        Ok(msg)
    } else {
        Err(msg)
    }
}
