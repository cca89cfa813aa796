//! SVG line charts for tabular histories and traces.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Plots every numeric column against the first column. A column is a series
/// when all its non-empty cells parse as numbers and at least one does; empty
/// cells are skipped. Each series is scaled to its own range so that curves
/// with different units stay readable.
pub fn line_chart_svg(header: &[String], rows: &[Vec<String>]) -> Result<String, String> {
    if header.len() < 2 {
        return Err("a chart needs an x column and at least one series".into());
    }
    if let Some(i) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(format!("row {} has {} cells, expected {}", i + 1, rows[i].len(), header.len()));
    }
    let parse = |s: &str| -> Option<Option<f64>> {
        let s = s.trim();
        if s.is_empty() {
            Some(None)
        } else {
            s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
        }
    };
    let xs: Vec<f64> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse(&r[0]).flatten().unwrap_or(i as f64))
        .collect();
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for (col, name) in header.iter().enumerate().skip(1) {
        let cells: Option<Vec<Option<f64>>> = rows.iter().map(|r| parse(&r[col])).collect();
        let Some(cells) = cells else { continue };
        let points: Vec<(f64, f64)> = cells.iter().zip(&xs).filter_map(|(y, &x)| y.map(|y| (x, y))).collect();
        if !points.is_empty() {
            series.push((name.clone(), points));
        }
    }
    if series.is_empty() {
        return Err("no numeric columns to plot".into());
    }
    let range = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = range(&mut xs.iter().copied());
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{} ({x0} to {x1})</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(&header[0])
    );
    for (k, (name, points)) in series.iter().enumerate() {
        let (y0, y1) = range(&mut points.iter().map(|p| p.1));
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(name)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{} ({y0} to {y1})</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
        let mut lines = csv.lines().map(|l| l.split(',').map(String::from).collect::<Vec<_>>());
        let header = lines.next().unwrap();
        (header, lines.collect())
    }

    #[test]
    fn one_polyline_per_numeric_series() {
        let (h, r) = table("generation,best_fitness,mean_novelty,label\n0,,1.5,a\n1,,2.5,b\n2,,2.0,c");
        let svg = line_chart_svg(&h, &r).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("mean_novelty"));
        assert!(!svg.contains(">label"));
    }

    #[test]
    fn rejects_ragged_rows() {
        let h = vec!["a".to_string(), "b".to_string()];
        assert!(line_chart_svg(&h, &[vec!["1".into()]]).is_err());
        assert!(line_chart_svg(&h[..1], &[]).is_err());
    }
}
