//! Plot-ready tables and a dependency-free SVG rendering of aggregate curves.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::analysis::AggregateCurve;

use super::trace_io::format_real;

/// Points kept per curve in the SVG.
pub const SVG_MAX_POINTS: usize = 600;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// `evals` followed by one column per curve. Rows cover the union of the
/// curves' evaluation counts; a curve without a point at that count leaves
/// its cell empty.
pub fn curve_table(curves: &[(u32, &AggregateCurve)]) -> String {
    let grid: BTreeSet<u64> = curves
        .iter()
        .flat_map(|(_, c)| c.evals.iter().copied())
        .collect();
    let mut out = String::from("evals");
    for (y, _) in curves {
        write!(out, ",Y_{y}").unwrap();
    }
    out.push('\n');
    let mut cursors = vec![0usize; curves.len()];
    for e in grid {
        write!(out, "{e}").unwrap();
        for ((_, c), i) in curves.iter().zip(cursors.iter_mut()) {
            out.push(',');
            if c.evals.get(*i) == Some(&e) {
                out.push_str(&format_real(c.values[*i]));
                *i += 1;
            }
        }
        out.push('\n');
    }
    out
}

fn nice_bounds(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

/// A self-contained SVG with one polyline per curve, `log dist` against
/// evaluations.
pub fn curve_svg(title: &str, curves: &[(u32, &AggregateCurve)]) -> String {
    let (w, h) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 130.0, 40.0, 50.0);
    let finite = |c: &&AggregateCurve| -> Vec<(f64, f64)> {
        let stride = c.values.len().div_ceil(SVG_MAX_POINTS).max(1);
        let mut pts: Vec<(f64, f64)> = c
            .evals
            .iter()
            .zip(&c.values)
            .step_by(stride)
            .filter(|(_, v)| v.is_finite())
            .map(|(&e, &v)| (e as f64, v))
            .collect();
        if let (Some(&e), Some(&v)) = (c.evals.last(), c.values.last()) {
            if v.is_finite() && pts.last().map(|p| p.0) != Some(e as f64) {
                pts.push((e as f64, v));
            }
        }
        pts
    };
    let series: Vec<(u32, Vec<(f64, f64)>)> = curves.iter().map(|(y, c)| (*y, finite(c))).collect();
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = nice_bounds(0.0_f64.min(x0), x1);
    let (y0, y1) = nice_bounds(y0, y1);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>"#,
        left + pw / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            sx(fx),
            h - bottom + 18.0,
            fx.round()
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.1}</text>"#,
            left - 6.0,
            sy(fy) + 4.0,
            fy
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">evaluations</text>"#,
        left + pw / 2.0,
        h - 12.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">log distance</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    )
    .unwrap();
    for (k, (y, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (x, v) in pts {
            write!(d, "{:.2},{:.2} ", sx(*x), sy(*v)).unwrap();
        }
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            d.trim_end()
        )
        .unwrap();
        let ly = top + 14.0 + 18.0 * k as f64;
        let lx = w - right + 12.0;
        writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">Y = {y}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Statistic;

    fn curve(per: u64, values: &[f64]) -> AggregateCurve {
        AggregateCurve {
            statistic: Statistic::Median,
            evals: (1..=values.len() as u64).map(|n| n * per).collect(),
            values: values.to_vec(),
            run_count: 1,
            diverged_runs: 0,
            underflowed_runs: 0,
        }
    }

    #[test]
    fn union_grid_leaves_gaps() {
        let a = curve(4, &[0.0, -1.0, -2.0]);
        let b = curve(8, &[0.5]);
        let t = curve_table(&[(1, &a), (2, &b)]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "evals,Y_1,Y_2");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("4,0.0000000000000000e0,"));
        assert!(lines[1].ends_with(','));
        assert!(lines[2].starts_with("8,-1.0000000000000000e0,5.0000000000000000e-1"));
        assert!(lines[3].ends_with(','));
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let a = curve(
            4,
            &(0..5000).map(|i| -(i as f64) * 0.01).collect::<Vec<_>>(),
        );
        let s = curve_svg("median", &[(12, &a)]);
        assert!(s.starts_with("<svg"));
        assert!(s.trim_end().ends_with("</svg>"));
        let points = s
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        assert!(points.split(' ').count() <= SVG_MAX_POINTS + 1);
    }
}
