//! CPLEX-style LP text export, for cross-checking with external solvers.
//!
//! Layout: `Minimize` with a single objective row `obj`, `Subject To` with rows
//! `c0, c1, ...`, a `Bounds` section and `End`. Variables are named `x0, x1, ...`.
//! The objective offset is not expressible in the format and is written as a
//! leading `\` comment.

use std::fmt::Write;

use super::{LinearProgram, Relation};

fn term(out: &mut String, coeff: f64, var: usize) {
    let sign = if coeff < 0.0 { '-' } else { '+' };
    let _ = write!(out, " {sign} {} x{var}", coeff.abs());
}

impl LinearProgram {
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\ objective offset: {}", self.offset());
        out.push_str("Minimize\n obj:");
        let mut any = false;
        for (j, &c) in self.objective().iter().enumerate() {
            if c != 0.0 {
                term(&mut out, c, j);
                any = true;
            }
        }
        if !any {
            out.push_str(" 0 x0");
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.constraints().iter().enumerate() {
            let _ = write!(out, " c{i}:");
            if row.coeffs.is_empty() {
                out.push_str(" 0 x0");
            }
            for &(j, a) in &row.coeffs {
                term(&mut out, a, j);
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {rel} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for (j, (&lo, &hi)) in self.lower().iter().zip(self.upper()).enumerate() {
            let _ = match (lo.is_finite(), hi.is_finite()) {
                (true, true) if lo == hi => writeln!(out, " x{j} = {lo}"),
                (true, true) => writeln!(out, " {lo} <= x{j} <= {hi}"),
                (true, false) => writeln!(out, " x{j} >= {lo}"),
                (false, true) => writeln!(out, " -inf <= x{j} <= {hi}"),
                (false, false) => writeln!(out, " x{j} free"),
            };
        }
        out.push_str("End\n");
        out
    }
}
