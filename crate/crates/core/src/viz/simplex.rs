// SPDX-License-Identifier: MIT OR Apache-2.0

use super::svg::{Svg, PALETTE};
use super::{check_unit, num, require_points, Figure, Table};
use crate::composition::LoadPoint;
use crate::error::Result;
use crate::scalar::Scalar;

pub const V_IL: [f64; 2] = [0.0, 0.0];
pub const V_EL: [f64; 2] = [1.0, 0.0];
pub const V_GL: [f64; 2] = [0.5, 0.866_025_403_784_438_6];

const DEGENERATE_SUM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexPoint<S> {
    pub step: usize,
    pub xy: [S; 2],
}

/// Barycentric position of `(il, el, gl)` in the reference triangle; a
/// (near-)zero total maps to the centroid.
pub fn simplex_project<S: Scalar>(il: S, el: S, gl: S) -> [S; 2] {
    let sum = il + el + gl;
    let third = S::one() / S::of(3.0);
    let (a, b, c) = if sum < S::of(DEGENERATE_SUM) {
        (third, third, third)
    } else {
        (il / sum, el / sum, gl / sum)
    };
    let v = |p: [f64; 2], i: usize| S::of(p[i]);
    [
        a * v(V_IL, 0) + b * v(V_EL, 0) + c * v(V_GL, 0),
        a * v(V_IL, 1) + b * v(V_EL, 1) + c * v(V_GL, 1),
    ]
}

/// Simplex scatter, optionally colored by a class per point (phase or cluster).
pub fn export_simplex<S: Scalar>(
    points: &[LoadPoint<S>],
    classes: Option<&[usize]>,
) -> Result<Figure> {
    require_points(points.len())?;
    if let Some(c) = classes {
        if c.len() != points.len() {
            return Err(crate::Error::LengthMismatch {
                step: 0,
                what: "classes vs points",
                left: c.len(),
                right: points.len(),
            });
        }
    }
    let mut table = Table::new(["step", "il", "el", "gl", "x", "y", "class"]);
    let size = 360.0;
    let pad = 40.0;
    let mut svg = Svg::new(size + 2.0 * pad, size * V_GL[1] + 2.0 * pad);
    let map = |x: f64, y: f64| (pad + x * size, pad + (V_GL[1] - y) * size);
    let corners = [V_IL, V_EL, V_GL].map(|v| map(v[0], v[1]));
    svg.polygon(
        &corners,
        r##"fill="none" stroke="#000000" stroke-width="1""##,
    );
    svg.text((corners[0].0 - 4.0, corners[0].1 + 14.0), "end", "IL");
    svg.text((corners[1].0 + 4.0, corners[1].1 + 14.0), "start", "EL");
    svg.text((corners[2].0, corners[2].1 - 6.0), "middle", "GL");
    for (i, p) in points.iter().enumerate() {
        for (name, v) in [("il", p.il), ("el", p.el), ("gl", p.gl)] {
            check_unit(|| format!("{name} at step {}", p.step), v)?;
        }
        let [x, y] = simplex_project(p.il, p.el, p.gl);
        let class = classes.map(|c| c[i]);
        table.row([
            p.step.to_string(),
            num(p.il),
            num(p.el),
            num(p.gl),
            num(x),
            num(y),
            class.map_or(String::new(), |c| c.to_string()),
        ]);
        let color = PALETTE[class.unwrap_or(0) % PALETTE.len()];
        svg.circle(
            map(x.as_f64(), y.as_f64()),
            2.5,
            &format!(
                r#"fill="{color}" fill-opacity="0.6" class="c{}""#,
                class.map_or("-".into(), |c| c.to_string())
            ),
        );
    }
    Ok(Figure {
        name: "simplex".into(),
        csv: table.finish(),
        svg: svg.finish("IL-EL-GL simplex"),
    })
}
