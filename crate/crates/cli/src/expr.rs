//! Closed-form expressions from the config, evaluated in `f64`.

use exmex::prelude::*;
use exmex::Differentiate;
use wentzell_core::C64;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Expr {
    text: String,
    flat: FlatEx<f64>,
    /// Position in the caller's variable list of each expression variable.
    slots: Vec<usize>,
    vars: Vec<&'static str>,
}

impl Expr {
    /// Parses `text`; every variable must be one of `vars`.
    pub fn parse(key: &str, text: &str, vars: &[&'static str]) -> CliResult<Self> {
        let flat = exmex::parse::<f64>(text).map_err(|e| CliError::usage(format!("config key '{key}': {e}")))?;
        Self::from_flat(key, text.to_string(), flat, vars)
    }

    fn from_flat(key: &str, text: String, flat: FlatEx<f64>, vars: &[&'static str]) -> CliResult<Self> {
        let slots = flat
            .var_names()
            .iter()
            .map(|name| {
                vars.iter().position(|v| v == name).ok_or_else(|| {
                    CliError::usage(format!("config key '{key}': unknown variable '{name}' (available: {})", vars.join(", ")))
                })
            })
            .collect::<CliResult<_>>()?;
        Ok(Expr { text, flat, slots, vars: vars.to_vec() })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// `values[i]` is the value of `vars[i]`.
    pub fn eval(&self, values: &[f64]) -> f64 {
        let args: Vec<f64> = self.slots.iter().map(|&i| values[i]).collect();
        self.flat.eval(&args).unwrap_or(f64::NAN)
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn partial(&self, var: &str) -> CliResult<Expr> {
        let names = self.flat.var_names();
        let Some(idx) = names.iter().position(|n| n == var) else {
            return Expr::parse("derivative", "0", &self.vars);
        };
        let d = self
            .flat
            .clone()
            .partial(idx)
            .map_err(|e| CliError::usage(format!("cannot differentiate '{}' by {var}: {e}", self.text)))?;
        Self::from_flat("derivative", format!("d/d{var} ({})", self.text), d, &self.vars)
    }
}

/// A complex field given by real and imaginary expressions.
#[derive(Debug, Clone)]
pub struct ComplexExpr {
    pub re: Expr,
    pub im: Expr,
}

impl ComplexExpr {
    pub fn parse(key_re: &str, re: &str, key_im: &str, im: &str, vars: &[&'static str]) -> CliResult<Self> {
        let im = if im.is_empty() { "0" } else { im };
        Ok(ComplexExpr { re: Expr::parse(key_re, re, vars)?, im: Expr::parse(key_im, im, vars)? })
    }

    pub fn eval(&self, values: &[f64]) -> C64 {
        C64::new(self.re.eval(values), self.im.eval(values))
    }

    pub fn partial(&self, var: &str) -> CliResult<ComplexExpr> {
        Ok(ComplexExpr { re: self.re.partial(var)?, im: self.im.partial(var)? })
    }
}

/// Complex literal such as `1+2i`, `-0.5`, `3i`.
pub fn parse_complex(key: &str, text: &str) -> CliResult<C64> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    compact.parse::<C64>().map_err(|_| CliError::usage(format!("config key '{key}': '{text}' is not a complex number")))
}
