//! Plain-text p x h grids of sweep results.

use std::fmt::Write;

use crate::sweep::SweepRow;

/// `1/8` for `0.125`, the decimal otherwise.
pub fn format_h(h: f64) -> String {
    let n = 1.0 / h;
    if (n - n.round()).abs() < 1e-9 && n >= 1.0 {
        format!("1/{}", n.round() as u64)
    } else {
        format!("{h}")
    }
}

fn format_rho(v: f64) -> String {
    if v < 100.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.1e}")
    }
}

fn unique<T: PartialEq + Copy>(rows: &[SweepRow], f: impl Fn(&SweepRow) -> T) -> Vec<T> {
    let mut out = Vec::new();
    for r in rows {
        let v = f(r);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

fn grid(out: &mut String, rows: &[&SweepRow], ps: &[usize], hs: &[f64], cell: impl Fn(&SweepRow) -> String) {
    let width = 8;
    let _ = write!(out, "{:>5} |", "p\\h");
    for h in hs {
        let _ = write!(out, " {:>w$}", format_h(*h), w = width - 1);
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(7 + width * hs.len()));
    for &p in ps {
        let _ = write!(out, "{p:>5} |");
        for &h in hs {
            let text = rows.iter().find(|r| r.p == p && r.h == h).map_or_else(|| "-".to_string(), |r| cell(r));
            let _ = write!(out, " {text:>w$}", w = width - 1);
        }
        out.push('\n');
    }
}

/// One iteration grid and one contraction grid per `(k, smoother, mode)`.
pub fn render(rows: &[SweepRow]) -> String {
    let ps = unique(rows, |r| r.p);
    let hs = unique(rows, |r| r.h.to_bits()).into_iter().map(f64::from_bits).collect::<Vec<_>>();
    let mut out = String::new();
    for key in unique(rows, |r| (r.k, r.smoother, r.mode)) {
        let group: Vec<&SweepRow> = rows.iter().filter(|r| (r.k, r.smoother, r.mode) == key).collect();
        let _ = writeln!(out, "k = {}, smoother = {}, mode = {}", key.0, key.1, key.2);
        out.push_str("iterations\n");
        grid(&mut out, &group, &ps, &hs, |r| r.iterations.clone());
        out.push_str("rho_max\n");
        grid(&mut out, &group, &ps, &hs, |r| r.rho_max.map_or_else(|| "-".into(), format_rho));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ModeName, SmootherName};

    fn row(p: usize, h: f64, iterations: &str, rho_max: Option<f64>) -> SweepRow {
        SweepRow { p, h, k: 0, smoother: SmootherName::Jacobi, mode: ModeName::MgSolver, iterations: iterations.into(), rho_max }
    }

    #[test]
    fn sizes_print_as_fractions() {
        assert_eq!(format_h(0.125), "1/8");
        assert_eq!(format_h(1.0 / 64.0), "1/64");
        assert_eq!(format_h(0.3), "0.3");
    }

    #[test]
    fn grid_has_one_line_per_degree() {
        let rows = [row(2, 0.5, "7", Some(0.2)), row(2, 0.25, "*", Some(0.99)), row(3, 0.5, "div.", Some(f64::INFINITY))];
        let text = render(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k = 0, smoother = jacobi, mode = mg-solver");
        assert!(lines[4].ends_with("7       *"), "{}", lines[4]);
        // missing cell
        assert!(lines[5].contains("div.") && lines[5].ends_with('-'));
        assert!(text.contains("inf"));
    }
}
