// SPDX-License-Identifier: MIT OR Apache-2.0

use super::svg::{Svg, HEIGHT, MARGIN, PALETTE, WIDTH};
use super::{check_unit, num, require_points, Figure, Table};
use crate::analytics::{ClusterModel, LoadComponent};
use crate::composition::LoadPoint;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One polyline per point across the IL, EL, GL, CLI axes, stroked by
/// cluster when a model is given.
pub fn export_parallel_coords<S: Scalar>(
    points: &[LoadPoint<S>],
    model: Option<&ClusterModel<S>>,
) -> Result<Figure> {
    require_points(points.len())?;
    if let Some(m) = model {
        if m.assignments.len() != points.len() {
            return Err(Error::LengthMismatch {
                step: 0,
                what: "cluster assignments vs points",
                left: m.assignments.len(),
                right: points.len(),
            });
        }
    }
    let mut table = Table::new(["step", "il", "el", "gl", "cli", "cluster"]);
    let mut svg = Svg::standard();
    let axes = LoadComponent::ALL;
    let gap = (WIDTH - 2.0 * MARGIN) / (axes.len() - 1) as f64;
    let x = |i: usize| MARGIN + i as f64 * gap;
    let y = |v: f64| HEIGHT - MARGIN - v * (HEIGHT - 2.0 * MARGIN);
    for (i, c) in axes.iter().enumerate() {
        svg.line(
            (x(i), y(0.0)),
            (x(i), y(1.0)),
            r##"stroke="#000000" stroke-width="1""##,
        );
        svg.text((x(i), y(1.0) - 8.0), "middle", c.name());
    }
    svg.text((x(0) - 4.0, y(0.0) + 4.0), "end", "0");
    svg.text((x(0) - 4.0, y(1.0) + 4.0), "end", "1");
    for (n, p) in points.iter().enumerate() {
        for c in axes {
            check_unit(|| format!("{} at step {}", c.name(), p.step), c.of(p))?;
        }
        let cluster = model.map(|m| m.assignments[n]);
        table.row([
            p.step.to_string(),
            num(p.il),
            num(p.el),
            num(p.gl),
            num(p.cli),
            cluster.map_or(String::new(), |c| c.to_string()),
        ]);
        let pts: Vec<_> = axes
            .iter()
            .enumerate()
            .map(|(i, c)| (x(i), y(c.of(p).as_f64())))
            .collect();
        let (color, class) = match cluster {
            Some(c) => (PALETTE[c % PALETTE.len()], format!("cluster{c}")),
            None => (PALETTE[3], "point".to_string()),
        };
        svg.polyline(
            &pts,
            &format!(r#"stroke="{color}" stroke-opacity="0.4" stroke-width="1" class="{class}""#),
        );
    }
    Ok(Figure {
        name: "parallel".into(),
        csv: table.finish(),
        svg: svg.finish("parallel coordinates"),
    })
}
