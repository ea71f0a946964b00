//! Decoding of scenario payload values: complex scalars as numbers or `[re, im]`,
//! matrices as row lists, and the block-sequence, polynomial and graph records.

use std::path::Path;

use num_complex::Complex64;
use serde_json::Value;

use opalg_core::blockseq::{BlockElement, BlockProfile, TailTemplate};
use opalg_core::fock::{AElement, FiniteCStarAlgebra, Graph, Symbol, TensorPoly, XElement};
use opalg_core::{ComplexMatrix, Correspondence, SquareArray};

use crate::error::{CliError, CliResult};

fn invalid(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{path}: {msg}"))
}

pub fn field<'a>(v: &'a Value, key: &str, path: &str) -> CliResult<&'a Value> {
    v.get(key)
        .ok_or_else(|| invalid(path, format!("missing field '{key}'")))
}

pub fn opt_field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.get(key).filter(|x| !x.is_null())
}

pub fn usize_of(v: &Value, path: &str) -> CliResult<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| invalid(path, "expected a nonnegative integer"))
}

pub fn f64_of(v: &Value, path: &str) -> CliResult<f64> {
    v.as_f64().ok_or_else(|| invalid(path, "expected a number"))
}

pub fn bool_of(v: &Value, path: &str) -> CliResult<bool> {
    v.as_bool().ok_or_else(|| invalid(path, "expected true or false"))
}

pub fn str_of<'a>(v: &'a Value, path: &str) -> CliResult<&'a str> {
    v.as_str().ok_or_else(|| invalid(path, "expected a string"))
}

pub fn array_of<'a>(v: &'a Value, path: &str) -> CliResult<&'a [Value]> {
    v.as_array()
        .map(|a| a.as_slice())
        .ok_or_else(|| invalid(path, "expected a list"))
}

pub fn usize_or(v: &Value, key: &str, default: usize, path: &str) -> CliResult<usize> {
    opt_field(v, key).map_or(Ok(default), |x| usize_of(x, &format!("{path}.{key}")))
}

pub fn complex(v: &Value, path: &str) -> CliResult<Complex64> {
    if let Some(x) = v.as_f64() {
        return Ok(Complex64::new(x, 0.0));
    }
    match v.as_array().map(|a| a.as_slice()) {
        Some([re, im]) => Ok(Complex64::new(f64_of(re, path)?, f64_of(im, path)?)),
        _ => Err(invalid(path, "expected a number or a [re, im] pair")),
    }
}

pub fn matrix(v: &Value, path: &str) -> CliResult<ComplexMatrix> {
    let rows = array_of(v, path)?;
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            array_of(row, &format!("{path}[{i}]"))?
                .iter()
                .enumerate()
                .map(|(j, x)| complex(x, &format!("{path}[{i}][{j}]")))
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    ComplexMatrix::from_rows(&parsed).map_err(|e| invalid(path, e))
}

pub fn matrices(v: &Value, path: &str) -> CliResult<Vec<ComplexMatrix>> {
    array_of(v, path)?
        .iter()
        .enumerate()
        .map(|(k, m)| matrix(m, &format!("{path}[{k}]")))
        .collect()
}

/// `d×d` list of lists of entries decoded by `entry`.
pub fn square_array<T>(
    v: &Value,
    path: &str,
    mut entry: impl FnMut(&Value, &str) -> CliResult<T>,
) -> CliResult<SquareArray<T>> {
    let rows = array_of(v, path)?;
    let d = rows.len();
    let mut out = Vec::with_capacity(d * d);
    for (i, row) in rows.iter().enumerate() {
        let row = array_of(row, &format!("{path}[{i}]"))?;
        if row.len() != d {
            return Err(invalid(
                path,
                format!("row {i} has {} entries, expected {d}", row.len()),
            ));
        }
        for (j, x) in row.iter().enumerate() {
            out.push(entry(x, &format!("{path}[{i}][{j}]"))?);
        }
    }
    SquareArray::new(d, out).map_err(|e| invalid(path, e))
}

/// `"array": [[M, …], …]` or `"matrix": M` as a `1×1` array.
pub fn matrix_array(payload: &Value, path: &str) -> CliResult<SquareArray<ComplexMatrix>> {
    if let Some(m) = opt_field(payload, "matrix") {
        return Ok(SquareArray::single(matrix(m, &format!("{path}.matrix"))?));
    }
    square_array(field(payload, "array", path)?, &format!("{path}.array"), matrix)
}

pub fn profile(v: &Value, path: &str) -> CliResult<BlockProfile> {
    let rule = str_of(field(v, "rule", path)?, &format!("{path}.rule"))?;
    let horizon = usize_of(field(v, "horizon", path)?, &format!("{path}.horizon"))?;
    match rule {
        "linear" => Ok(BlockProfile::linear(horizon)),
        "constant" => {
            let r = usize_of(field(v, "r", path)?, &format!("{path}.r"))?;
            BlockProfile::constant(r, horizon).map_err(|e| invalid(path, e))
        }
        other => Err(invalid(path, format!("unknown size rule '{other}' (linear, constant)"))),
    }
}

pub fn tail(v: &Value, path: &str) -> CliResult<TailTemplate> {
    let alpha =
        opt_field(v, "scalar").map_or(Ok(Complex64::new(0.0, 0.0)), |x| complex(x, &format!("{path}.scalar")))?;
    let mut entries = Vec::new();
    if let Some(list) = opt_field(v, "entries") {
        for (k, e) in array_of(list, &format!("{path}.entries"))?.iter().enumerate() {
            let p = format!("{path}.entries[{k}]");
            match array_of(e, &p)? {
                [i, j, c] => entries.push((usize_of(i, &p)?, usize_of(j, &p)?, complex(c, &p)?)),
                _ => return Err(invalid(&p, "expected [row, column, value]")),
            }
        }
    }
    Ok(TailTemplate::new(alpha, &entries))
}

pub fn block_element(v: &Value, profile: BlockProfile, path: &str) -> CliResult<BlockElement> {
    let explicit = matrices(field(v, "explicit", path)?, &format!("{path}.explicit"))?;
    let t = tail(field(v, "tail", path)?, &format!("{path}.tail"))?;
    BlockElement::new(profile, explicit, t).map_err(|e| invalid(path, e))
}

pub fn read_graph(v: &Value, base: &Path, path: &str) -> CliResult<Graph> {
    if let Some(text) = opt_field(v, "graph_text") {
        return Graph::parse(str_of(text, path)?).map_err(|e| invalid(path, e));
    }
    let file = str_of(field(v, "graph", path)?, &format!("{path}.graph"))?;
    let full = base.join(file);
    let text = std::fs::read_to_string(&full).map_err(|source| CliError::Io {
        path: full.clone(),
        source,
    })?;
    Graph::parse(&text).map_err(|e| invalid(&format!("{path}.graph ({})", full.display()), e))
}

pub fn correspondence(v: &Value, base: &Path, path: &str) -> CliResult<Correspondence> {
    let kind = str_of(field(v, "kind", path)?, &format!("{path}.kind"))?;
    match kind {
        "graph" => Ok(Correspondence::Graph(read_graph(v, base, path)?)),
        "free" => Ok(Correspondence::Free(usize_of(
            field(v, "d", path)?,
            &format!("{path}.d"),
        )?)),
        "self-over-a" => {
            let dims = array_of(field(v, "block_dims", path)?, path)?
                .iter()
                .map(|x| usize_of(x, &format!("{path}.block_dims")))
                .collect::<CliResult<Vec<_>>>()?;
            let alg = match opt_field(v, "trace_weights") {
                Some(w) => {
                    let w = array_of(w, path)?
                        .iter()
                        .map(|x| f64_of(x, &format!("{path}.trace_weights")))
                        .collect::<CliResult<Vec<_>>>()?;
                    FiniteCStarAlgebra::new(dims, w)
                }
                None => FiniteCStarAlgebra::uniform(dims),
            }
            .map_err(|e| invalid(path, e))?;
            Ok(Correspondence::SelfOverA(alg))
        }
        other => Err(invalid(
            path,
            format!("unknown correspondence '{other}' (graph, free, self-over-a)"),
        )),
    }
}

/// `{"a": [[block, …], …], "x": [[coord, …], …], "terms": [{"coefficient": c, "word": ["rho0", "t1"]}]}`.
pub fn tensor_poly(v: &Value, path: &str) -> CliResult<TensorPoly> {
    let a_table = match opt_field(v, "a") {
        Some(list) => array_of(list, path)?
            .iter()
            .enumerate()
            .map(|(k, a)| {
                Ok(AElement {
                    blocks: matrices(a, &format!("{path}.a[{k}]"))?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };
    let x_table = match opt_field(v, "x") {
        Some(list) => array_of(list, path)?
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let p = format!("{path}.x[{k}]");
                Ok(XElement::new(
                    array_of(x, &p)?
                        .iter()
                        .map(|c| complex(c, &p))
                        .collect::<CliResult<_>>()?,
                ))
            })
            .collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };
    let mut poly = TensorPoly::new(a_table, x_table);
    for (k, term) in array_of(field(v, "terms", path)?, path)?.iter().enumerate() {
        let p = format!("{path}.terms[{k}]");
        let c = opt_field(term, "coefficient").map_or(Ok(Complex64::new(1.0, 0.0)), |c| complex(c, &p))?;
        let word = array_of(field(term, "word", &p)?, &p)?
            .iter()
            .map(|s| symbol(str_of(s, &p)?, &p))
            .collect::<CliResult<Vec<_>>>()?;
        poly = poly.with_term(c, word);
    }
    Ok(poly)
}

fn symbol(s: &str, path: &str) -> CliResult<Symbol> {
    let parse = |rest: &str| {
        rest.parse::<usize>()
            .map_err(|_| invalid(path, format!("bad symbol '{s}'")))
    };
    if let Some(rest) = s.strip_prefix("rho") {
        Ok(Symbol::Rho(parse(rest)?))
    } else if let Some(rest) = s.strip_prefix('t') {
        Ok(Symbol::T(parse(rest)?))
    } else {
        Err(invalid(path, format!("bad symbol '{s}' (expected rhoN or tN)")))
    }
}

pub fn strings(v: &Value, path: &str) -> CliResult<Vec<String>> {
    array_of(v, path)?
        .iter()
        .map(|s| str_of(s, path).map(str::to_string))
        .collect()
}

pub fn usizes(v: &Value, path: &str) -> CliResult<Vec<usize>> {
    array_of(v, path)?.iter().map(|s| usize_of(s, path)).collect()
}

/// Matrix as `[[[re, im], …], …]` rows for report artifacts.
pub fn matrix_value(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|z| serde_json::json!([z.re, z.im])).collect()))
            .collect(),
    )
}
