// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::{FRAC_PI_2, PI};

use super::svg::{Svg, PALETTE};
use super::{check_unit, num, Figure, Table};
use crate::analytics::TraceSummary;
use crate::error::Result;
use crate::proxies::PROXY_NAMES;
use crate::scalar::Scalar;

/// Axis order, clockwise from the top.
pub const RADAR_AXES: [&str; 6] = PROXY_NAMES;

const RADIUS: f64 = 140.0;
const CENTER: (f64, f64) = (200.0, 190.0);

fn axis_point(axis: usize, r: f64) -> (f64, f64) {
    let angle = -FRAC_PI_2 + axis as f64 * 2.0 * PI / 6.0;
    (CENTER.0 + r * angle.cos(), CENTER.1 + r * angle.sin())
}

/// Polygon vertices in SVG coordinates for six values in `[0, 1]`.
pub fn radar_vertices(values: &[f64; 6]) -> [(f64, f64); 6] {
    std::array::from_fn(|i| axis_point(i, values[i] * RADIUS))
}

/// Six-axis profile of the normalized proxy means.
pub fn export_radar<S: Scalar>(summary: &TraceSummary<S>) -> Result<Figure> {
    let values = summary.normalized_means.to_array();
    let mut table = Table::new(["axis", "value"]);
    for (name, v) in RADAR_AXES.iter().zip(values) {
        check_unit(|| format!("normalized mean {name}"), v)?;
        table.row([name.to_string(), num(v)]);
    }
    let mut svg = Svg::new(400.0, 380.0);
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let pts: Vec<_> = (0..6).map(|i| axis_point(i, ring * RADIUS)).collect();
        svg.polygon(&pts, r##"fill="none" stroke="#cccccc" stroke-width="1""##);
    }
    for (i, name) in RADAR_AXES.iter().enumerate() {
        svg.line(
            CENTER,
            axis_point(i, RADIUS),
            r##"stroke="#999999" stroke-width="1""##,
        );
        svg.text(axis_point(i, RADIUS + 16.0), "middle", name);
    }
    let vertices = radar_vertices(&values.map(|v| v.as_f64()));
    svg.polygon(
        &vertices,
        &format!(
            r#"fill="{c}" fill-opacity="0.3" stroke="{c}" stroke-width="2" class="profile""#,
            c = PALETTE[0]
        ),
    );
    Ok(Figure {
        name: "radar".into(),
        csv: table.finish(),
        svg: svg.finish("proxy profile"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_means_form_a_regular_hexagon() {
        let v = radar_vertices(&[0.5; 6]);
        let d = |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        for i in 0..6 {
            assert!((d(v[i], CENTER) - 70.0).abs() < 1e-9);
            assert!((d(v[i], v[(i + 1) % 6]) - 70.0).abs() < 1e-9);
        }
    }

    #[test]
    fn single_axis_collapses_to_a_spike() {
        let v = radar_vertices(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(v[0], (CENTER.0, CENTER.1 - RADIUS));
        assert!(v[1..].iter().all(|p| *p == CENTER));
    }
}
