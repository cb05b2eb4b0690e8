//! Plain-text snapshot format.
//!
//! ```text
//! # optional comment lines
//! time <t>
//! r_max <r_max>
//! radial_mapping <linear|log|stretched>
//! radial_nodes <n>
//! <r> <weight>            (n lines)
//! direction_rule <product|lebedev> <degree>
//! direction_nodes <m>
//! <x> <y> <z> <weight>    (m lines)
//! values <n·m>
//! <g>                     (n·m lines, radial-major)
//! ```
//!
//! Every float is written with 17 significant digits so a state survives a
//! write/read cycle bit for bit. The grid is stored explicitly rather than
//! rebuilt from its parameters.

use std::fmt::Write as _;
use std::sync::Arc;

use super::{DistributionState, MomentumGrid};
use crate::error::{Error, Result};
use crate::kinematics::MomentumVector;
use crate::quadrature::{RadialRule, SphereRule};
use crate::scalar::Real;

fn num<T: Real>(out: &mut String, x: T) {
    let _ = write!(out, "{x:.16e}");
}

/// Serialises `state`; each `header` line is written as a `# ` comment.
pub fn serialize_snapshot<T: Real>(state: &DistributionState<T>, header: &[String]) -> String {
    let grid = &state.grid;
    let mut out = String::new();
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    out.push_str("time ");
    num(&mut out, state.time);
    out.push_str("\nr_max ");
    num(&mut out, grid.radial.r_max);
    let _ = writeln!(out, "\nradial_mapping {}", grid.radial.mapping);
    let _ = writeln!(out, "radial_nodes {}", grid.n_radial());
    for (&r, &w) in grid.radial.nodes.iter().zip(&grid.radial.weights) {
        num(&mut out, r);
        out.push(' ');
        num(&mut out, w);
        out.push('\n');
    }
    let _ = writeln!(out, "direction_rule {} {}", grid.directions.kind, grid.directions.degree);
    let _ = writeln!(out, "direction_nodes {}", grid.n_directions());
    for (d, &w) in grid.directions.nodes.iter().zip(&grid.directions.weights) {
        for k in 0..3 {
            num(&mut out, d[k]);
            out.push(' ');
        }
        num(&mut out, w);
        out.push('\n');
    }
    let _ = writeln!(out, "values {}", state.g.len());
    for &g in &state.g {
        num(&mut out, g);
        out.push('\n');
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok((i + 1, line.split_whitespace().collect()));
        }
        Err(Error::Parse {
            line: 0,
            message: "unexpected end of snapshot".into(),
        })
    }

    fn keyed(&mut self, key: &str, arity: usize) -> Result<(usize, Vec<&'a str>)> {
        let (line, toks) = self.next()?;
        if toks.first() != Some(&key) || toks.len() != arity + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected `{key}` with {arity} value(s)"),
            });
        }
        Ok((line, toks[1..].to_vec()))
    }

    fn numbers<T: Real>(&mut self, count: usize) -> Result<Vec<T>> {
        let (line, toks) = self.next()?;
        if toks.len() != count {
            return Err(Error::Parse {
                line,
                message: format!("expected {count} numbers, found {}", toks.len()),
            });
        }
        toks.iter().map(|t| parse_num(line, t)).collect()
    }
}

fn parse_num<T: Real>(line: usize, tok: &str) -> Result<T> {
    tok.parse::<T>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid number `{tok}`"),
    })
}

fn parse_count(line: usize, tok: &str) -> Result<usize> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid count `{tok}`"),
    })
}

/// Inverse of [`serialize_snapshot`]; comment lines are skipped.
pub fn parse_snapshot<T: Real>(text: &str) -> Result<DistributionState<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (l, v) = lines.keyed("time", 1)?;
    let time = parse_num(l, v[0])?;
    let (l, v) = lines.keyed("r_max", 1)?;
    let r_max = parse_num(l, v[0])?;
    let (l, v) = lines.keyed("radial_mapping", 1)?;
    let mapping = v[0].parse().map_err(|e: Error| Error::Parse {
        line: l,
        message: e.to_string(),
    })?;
    let (l, v) = lines.keyed("radial_nodes", 1)?;
    let nr = parse_count(l, v[0])?;
    let mut radial = RadialRule {
        nodes: Vec::with_capacity(nr),
        weights: Vec::with_capacity(nr),
        r_max,
        mapping,
    };
    for _ in 0..nr {
        let rw = lines.numbers::<T>(2)?;
        radial.nodes.push(rw[0]);
        radial.weights.push(rw[1]);
    }
    let (l, v) = lines.keyed("direction_rule", 2)?;
    let kind = v[0].parse().map_err(|e: Error| Error::Parse {
        line: l,
        message: e.to_string(),
    })?;
    let degree = parse_count(l, v[1])?;
    let (l, v) = lines.keyed("direction_nodes", 1)?;
    let nd = parse_count(l, v[0])?;
    let mut directions = SphereRule {
        nodes: Vec::with_capacity(nd),
        weights: Vec::with_capacity(nd),
        degree,
        kind,
    };
    for _ in 0..nd {
        let x = lines.numbers::<T>(4)?;
        directions.nodes.push(MomentumVector::new(x[0], x[1], x[2]));
        directions.weights.push(x[3]);
    }
    let (l, v) = lines.keyed("values", 1)?;
    let n = parse_count(l, v[0])?;
    if n != nr * nd {
        return Err(Error::Parse {
            line: l,
            message: format!("{n} values for a {nr} x {nd} grid"),
        });
    }
    let g = (0..n).map(|_| lines.numbers::<T>(1).map(|x| x[0])).collect::<Result<Vec<T>>>()?;
    if let Ok((line, _)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: "trailing content after values".into(),
        });
    }
    let grid = MomentumGrid::new(radial, directions)?;
    DistributionState::new(Arc::new(grid), g, time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{RadialMapping, SphereRuleKind};
    use crate::state::InitFamily;

    fn state() -> DistributionState<f64> {
        let grid = MomentumGrid::new(
            RadialRule::build(6, 20.0, RadialMapping::Log).unwrap(),
            SphereRule::build(SphereRuleKind::Lebedev, 5).unwrap(),
        )
        .unwrap();
        let mut s = DistributionState::init(
            Arc::new(grid),
            &InitFamily::Anisotropic {
                epsilon: 0.013,
                beta: 0.7,
                axis: MomentumVector::new(1.0, 2.0, 3.0),
            },
        )
        .unwrap();
        s.time = 0.1 + 0.2;
        s
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let s = state();
        let text = serialize_snapshot(&s, &["kernel.family = soft".to_string()]);
        let back = parse_snapshot::<f64>(&text).unwrap();
        assert_eq!(back.time.to_bits(), s.time.to_bits());
        assert!(back.g.iter().zip(&s.g).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(*back.grid, *s.grid);
        assert_eq!(serialize_snapshot(&back, &["kernel.family = soft".to_string()]), text);
    }

    #[test]
    fn f32_round_trip() {
        let grid = MomentumGrid::<f32>::new(
            RadialRule::build(5, 10.0, RadialMapping::Stretched).unwrap(),
            SphereRule::build(SphereRuleKind::Lebedev, 3).unwrap(),
        )
        .unwrap();
        let s = DistributionState::init(Arc::new(grid), &InitFamily::CanonicalSmall { epsilon: 0.3 }).unwrap();
        let back = parse_snapshot::<f32>(&serialize_snapshot(&s, &[])).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn malformed_input_reports_line() {
        let text = serialize_snapshot(&state(), &[]);
        let broken = text.replacen("radial_nodes 6", "radial_nodes x", 1);
        match parse_snapshot::<f64>(&broken) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let truncated: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(parse_snapshot::<f64>(&truncated).is_err());
    }
}
