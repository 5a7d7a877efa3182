// SPDX-License-Identifier: MIT OR Apache-2.0

use super::svg::{Frame, Svg, PALETTE};
use super::{check_unit, num, require_points, Figure, Table};
use crate::analytics::LoadComponent;
use crate::composition::LoadPoint;
use crate::error::{Error, Result};
use crate::lgd::InterventionHistory;
use crate::scalar::Scalar;

/// Level above which a point gets a spike marker.
pub const SPIKE_MARKER: f64 = 0.8;

/// IL/EL/GL/CLI over time with spike markers, error rules and intervention
/// ticks.
///
/// The `error` column is `1`/`0` when labels are given and empty otherwise;
/// `intervention` holds the id applied at that step, if any.
pub fn export_load_curves<S: Scalar>(
    points: &[LoadPoint<S>],
    labels: Option<&[bool]>,
    history: Option<&InterventionHistory<S>>,
) -> Result<Figure> {
    require_points(points.len())?;
    if let Some(l) = labels {
        if l.len() != points.len() {
            return Err(Error::LengthMismatch {
                step: 0,
                what: "labels vs points",
                left: l.len(),
                right: points.len(),
            });
        }
    }
    for p in points {
        for c in LoadComponent::ALL {
            check_unit(|| format!("{} at step {}", c.name(), p.step), c.of(p))?;
        }
    }

    let mut table = Table::new(["step", "il", "el", "gl", "cli", "error", "intervention"]);
    for (i, p) in points.iter().enumerate() {
        let error = labels.map_or("", |l| if l[i] { "1" } else { "0" });
        let iv = history
            .and_then(|h| h.at_step(p.step))
            .map_or("", |e| e.intervention_id.as_str());
        table.row([
            p.step.to_string(),
            num(p.il),
            num(p.el),
            num(p.gl),
            num(p.cli),
            error.to_string(),
            iv.to_string(),
        ]);
    }

    let first = points[0].step as f64;
    let last = points[points.len() - 1].step as f64;
    let frame = Frame {
        x0: first,
        x1: last,
        y0: 0.0,
        y1: 1.0,
    };
    let mut svg = Svg::standard();
    frame.draw_axes(&mut svg, "step", "load");
    if let Some(l) = labels {
        for (p, _) in points.iter().zip(l).filter(|(_, e)| **e) {
            let x = p.step as f64;
            svg.line(
                frame.map(x, 0.0),
                frame.map(x, 1.0),
                r##"stroke="#000000" stroke-opacity="0.35" stroke-width="1" class="error""##,
            );
        }
    }
    svg.line(
        frame.map(first, SPIKE_MARKER),
        frame.map(last, SPIKE_MARKER),
        r##"stroke="#555555" stroke-dasharray="4 3" stroke-width="1""##,
    );
    for (k, c) in LoadComponent::ALL.into_iter().enumerate() {
        let pts: Vec<_> = points
            .iter()
            .map(|p| frame.map(p.step as f64, c.of(p).as_f64()))
            .collect();
        let color = PALETTE[k];
        svg.polyline(
            &pts,
            &format!(
                r#"stroke="{color}" stroke-width="1.5" class="{}""#,
                c.name()
            ),
        );
        for (p, xy) in points.iter().zip(&pts) {
            if c.of(p) > S::of(SPIKE_MARKER) {
                svg.circle(*xy, 3.0, &format!(r#"fill="{color}" class="spike""#));
            }
        }
        svg.text((560.0, 20.0 + 14.0 * k as f64), "start", c.name());
        svg.line(
            (540.0, 16.0 + 14.0 * k as f64),
            (556.0, 16.0 + 14.0 * k as f64),
            &format!(r#"stroke="{color}" stroke-width="2""#),
        );
    }
    if let Some(h) = history {
        for e in &h.events {
            let (x, y) = frame.map(e.step as f64, 0.0);
            svg.polygon(
                &[(x, y), (x - 3.0, y + 6.0), (x + 3.0, y + 6.0)],
                r##"fill="#000000" class="intervention""##,
            );
        }
    }
    Ok(Figure {
        name: "curves".into(),
        csv: table.finish(),
        svg: svg.finish("load curves"),
    })
}
