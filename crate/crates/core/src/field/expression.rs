use std::f64::consts::PI;
use std::sync::Arc;

use evalexpr::{build_operator_tree, Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value};

use super::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Point};

type V = Value<DefaultNumericTypes>;

/// Variables `x`, `y`, `z` and `pi`, plus one-argument math shorthands.
struct PointContext {
    vars: [V; 4],
}

impl Context for PointContext {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&V> {
        match identifier {
            "x" => Some(&self.vars[0]),
            "y" => Some(&self.vars[1]),
            "z" => Some(&self.vars[2]),
            "pi" => Some(&self.vars[3]),
            _ => None,
        }
    }

    fn call_function(&self, identifier: &str, argument: &V) -> EvalexprResult<V, DefaultNumericTypes> {
        let f: fn(f64) -> f64 = match identifier {
            "sin" => f64::sin,
            "cos" => f64::cos,
            "tan" => f64::tan,
            "sqrt" => f64::sqrt,
            "abs" => f64::abs,
            "exp" => f64::exp,
            "ln" => f64::ln,
            _ => return Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string())),
        };
        Ok(Value::Float(f(argument.as_number()?)))
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(&mut self, _disabled: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        Err(EvalexprError::ContextNotMutable)
    }
}

fn evaluate(node: &Node<DefaultNumericTypes>, p: &Point) -> EvalexprResult<f64, DefaultNumericTypes> {
    let ctx = PointContext {
        vars: [Value::Float(p[0]), Value::Float(p[1]), Value::Float(p[2]), Value::Float(PI)],
    };
    node.eval_number_with_context(&ctx)
}

/// Field from an arithmetic expression in `x`, `y`, `z`.
///
/// Besides the operators and `math::*` functions of the expression
/// language, `sin cos tan sqrt abs exp ln` and the constant `pi` are
/// available. Evaluation failures produce NaN, which grid sampling rejects.
pub fn expression_field(source: &str, bbox: Aabb) -> Result<ScalarField> {
    let node = build_operator_tree::<DefaultNumericTypes>(source)
        .map_err(|e| Error::domain(format!("expression {source:?}: {e}")))?;
    evaluate(&node, &bbox.center()).map_err(|e| Error::domain(format!("expression {source:?}: {e}")))?;
    let node = Arc::new(node);
    Ok(ScalarField::new(bbox, move |p| evaluate(&node, p).unwrap_or(f64::NAN)))
}
