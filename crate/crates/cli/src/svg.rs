//! Phase × category heatmap as a standalone SVG.
//!
//! Colour ramp: linear in share from white (#ffffff at 0) to #08519c at the largest
//! share in the figure. Every printed number has four decimals.

use std::fmt::Write;

use designseq_core::model::{ActionCategory, Phase};

const CELL_W: u32 = 110;
const CELL_H: u32 = 28;
const LABEL_W: u32 = 120;
const HEADER_H: u32 = 56;
const RAMP_END: (f64, f64, f64) = (8.0, 81.0, 156.0);

fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let c = |end: f64| (255.0 + (end - 255.0) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        c(RAMP_END.0),
        c(RAMP_END.1),
        c(RAMP_END.2)
    )
}

/// `shares[category][phase]` as fractions of each phase's actions.
pub fn heatmap(title: &str, shares: &[[f64; 3]; ActionCategory::COUNT]) -> String {
    let max = shares.iter().flatten().copied().fold(0.0f64, f64::max);
    let width = LABEL_W + 3 * CELL_W + 10;
    let height = HEADER_H + ActionCategory::COUNT as u32 * CELL_H + 10;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<title>{title}</title>"#);
    let _ = writeln!(
        s,
        r#"<text x="{LABEL_W}" y="20" font-size="14" font-weight="bold">{title}</text>"#
    );
    for (j, phase) in Phase::ALL.iter().enumerate() {
        let x = LABEL_W + j as u32 * CELL_W + CELL_W / 2;
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            HEADER_H - 8,
            phase.token()
        );
    }
    for (i, cat) in ActionCategory::ALL.iter().enumerate() {
        let y = HEADER_H + i as u32 * CELL_H;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LABEL_W - 6,
            y + CELL_H / 2 + 4,
            cat.name()
        );
        for (j, &v) in shares[i].iter().enumerate() {
            let x = LABEL_W + j as u32 * CELL_W;
            let t = if max > 0.0 { v / max } else { 0.0 };
            let ink = if t > 0.55 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{}" stroke="#cccccc"/>"##,
                ramp(t)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{:.4}</text>"#,
                x + CELL_W / 2,
                y + CELL_H / 2 + 4,
                100.0 * v
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_is_monotone() {
        let lum = |hex: &str| {
            u32::from_str_radix(&hex[1..3], 16).unwrap()
                + u32::from_str_radix(&hex[3..5], 16).unwrap()
        };
        assert_eq!(ramp(0.0), "#ffffff");
        assert_eq!(ramp(1.0), "#08519c");
        let mut last = u32::MAX;
        for k in 0..=20 {
            let l = lum(&ramp(k as f64 / 20.0));
            assert!(l <= last);
            last = l;
        }
    }

    #[test]
    fn shape() {
        let mut shares = [[0.0; 3]; ActionCategory::COUNT];
        shares[2] = [0.5, 0.25, 1.0 / 3.0];
        let svg = heatmap("test", &shares);
        assert_eq!(svg.matches("<rect").count(), 33);
        assert!(svg.contains(">33.3333<"));
    }
}
