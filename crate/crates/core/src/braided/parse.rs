//! Textual operator expressions for the `verify --expr` command.
//!
//! Tokens are separated by whitespace and evaluated right to left starting
//! from 1: generators (`z s xi1 xi2`, optional `^n`) multiply from the left,
//! operators (`dz ds Lz Ls`, optional `^p`, and `T[xi1]`, `T[xi2]`,
//! `Tstar[xi1]`, `Tstar[xi2]`) act on everything to their right.
//! Example: `ds z s^2` evaluates to ∂_s(z s²).

use super::laurent::Rational;
use super::ncpoly::{NCPolynomial, STANDARD};
use super::ops::{apply_word, Op, OperatorSeries};
use crate::error::{QError, QResult};

/// Order cap for series operators written in expressions.
pub const EXPR_ORDER_CAP: usize = 12;

fn split_power(tok: &str) -> QResult<(&str, i64)> {
    match tok.split_once('^') {
        None => Ok((tok, 1)),
        Some((base, e)) => e
            .parse::<i64>()
            .map(|e| (base, e))
            .map_err(|_| QError::Parse(format!("bad exponent in '{tok}'"))),
    }
}

fn parse_token(tok: &str) -> QResult<Vec<Op<Rational>>> {
    if let Some(rest) = tok.strip_prefix("Tstar[").or_else(|| tok.strip_prefix("T[")) {
        let name = rest.strip_suffix(']').ok_or_else(|| QError::Parse(format!("unclosed bracket in '{tok}'")))?;
        let g = STANDARD.lookup(name).map_err(|e| QError::Parse(e.to_string()))?;
        if !name.starts_with("xi") {
            return Err(QError::Parse(format!("shift parameter must be xi1 or xi2, got '{name}'")));
        }
        let xi = NCPolynomial::gen(g, 1);
        let series = if tok.starts_with("Tstar") {
            OperatorSeries::conjugate_shift(xi, EXPR_ORDER_CAP)
        } else {
            OperatorSeries::shift(xi, EXPR_ORDER_CAP)
        };
        return Ok(vec![Op::Series(series)]);
    }
    let (base, e) = split_power(tok)?;
    let op = |gen: &str| STANDARD.lookup(gen).map_err(|err| QError::Parse(err.to_string()));
    match base {
        "dz" | "ds" => {
            if e < 0 {
                return Err(QError::Parse(format!("negative derivative order in '{tok}'")));
            }
            Ok(vec![Op::d(op(&base[1..])?); e as usize])
        }
        "Lz" | "Ls" => Ok(vec![Op::lam(op(&base[1..].to_lowercase())?, e)]),
        _ => Ok(vec![Op::mul_left(NCPolynomial::gen(op(base)?, e))]),
    }
}

/// Parse an expression into an operator word.
pub fn parse_word(expr: &str) -> QResult<Vec<Op<Rational>>> {
    let mut word = Vec::new();
    for tok in expr.split_whitespace() {
        word.extend(parse_token(tok)?);
    }
    if word.is_empty() {
        return Err(QError::Parse("empty expression".into()));
    }
    Ok(word)
}

/// Evaluate an expression to its normal form.
pub fn evaluate(expr: &str) -> QResult<NCPolynomial<Rational>> {
    apply_word(&parse_word(expr)?, &NCPolynomial::one())
}
