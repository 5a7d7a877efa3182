// SPDX-License-Identifier: MIT OR Apache-2.0

use std::str::FromStr;

use super::svg::{Svg, HEIGHT, MARGIN, WIDTH};
use super::{num, require_points, Figure, Table};
use crate::error::{Error, Result};
use crate::proxies::{layer_dispersions, layer_entropies};
use crate::scalar::Scalar;
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSignal {
    Entropy,
    Dispersion,
}

impl LayerSignal {
    pub fn name(self) -> &'static str {
        match self {
            LayerSignal::Entropy => "entropy",
            LayerSignal::Dispersion => "dispersion",
        }
    }
}

impl FromStr for LayerSignal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "entropy" => Ok(Self::Entropy),
            "dispersion" => Ok(Self::Dispersion),
            other => Err(format!("unknown layer signal `{other}`")),
        }
    }
}

/// Per-layer signal as an `L × T` matrix (row = layer).
pub fn layer_matrix<S: Scalar>(trace: &Trace<S>, signal: LayerSignal) -> Result<Vec<Vec<S>>> {
    let layers = trace.meta.num_layers;
    let mut m = vec![Vec::with_capacity(trace.len()); layers];
    for step in &trace.steps {
        let column = match signal {
            LayerSignal::Entropy => layer_entropies(step)?,
            LayerSignal::Dispersion => layer_dispersions(step, &trace.meta)?,
        };
        if column.len() != layers {
            return Err(Error::LengthMismatch {
                step: step.step,
                what: "layers",
                left: column.len(),
                right: layers,
            });
        }
        for (row, v) in m.iter_mut().zip(column) {
            row.push(v);
        }
    }
    Ok(m)
}

// white → dark blue
fn color(s: f64) -> String {
    let lerp = |a: f64, b: f64| (a + (b - a) * s).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(247.0, 8.0),
        lerp(251.0, 48.0),
        lerp(255.0, 107.0)
    )
}

/// Layer × time heatmap. Color scales linearly between the matrix min and
/// max, both printed in the legend; a constant matrix renders in one color.
pub fn export_heatmap<S: Scalar>(trace: &Trace<S>, signal: LayerSignal) -> Result<Figure> {
    require_points(trace.len())?;
    let m = layer_matrix(trace, signal)?;
    let header =
        std::iter::once("layer".to_string()).chain(trace.steps.iter().map(|s| s.step.to_string()));
    let mut table = Table::new(header);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (l, row) in m.iter().enumerate() {
        table.row(std::iter::once(l.to_string()).chain(row.iter().map(|v| num(*v))));
        for v in row {
            lo = lo.min(v.as_f64());
            hi = hi.max(v.as_f64());
        }
    }

    let mut svg = Svg::standard();
    let layers = m.len().max(1) as f64;
    let cw = (WIDTH - 2.0 * MARGIN) / trace.len() as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / layers;
    for (l, row) in m.iter().enumerate() {
        // layer 0 at the bottom
        let y = HEIGHT - MARGIN - (l as f64 + 1.0) * ch;
        for (t, v) in row.iter().enumerate() {
            let s = if hi > lo {
                (v.as_f64() - lo) / (hi - lo)
            } else {
                0.5
            };
            svg.rect(
                MARGIN + t as f64 * cw,
                y,
                cw,
                ch,
                &format!(r#"fill="{}""#, color(s)),
            );
        }
    }
    svg.text((MARGIN, HEIGHT - MARGIN + 14.0), "start", "step");
    svg.text((MARGIN - 4.0, MARGIN - 8.0), "start", "layer");
    let legend = if hi > lo {
        format!("{}: min {lo} max {hi}", signal.name())
    } else {
        format!("{}: min = max = {lo}", signal.name())
    };
    svg.text((WIDTH - MARGIN, MARGIN - 8.0), "end", &legend);
    Ok(Figure {
        name: format!("heatmap_{}", signal.name()),
        csv: table.finish(),
        svg: svg.finish(&format!("layer-time {}", signal.name())),
    })
}
