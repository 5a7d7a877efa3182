// SPDX-License-Identifier: MIT OR Apache-2.0

use super::svg::{Frame, Svg, PALETTE};
use super::{num, Figure, Table};
use crate::analytics::LoadComponent;
use crate::composition::LoadPoint;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of relative-position samples per band.
pub const BAND_GRID: usize = 100;
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band<S> {
    /// Relative position in `[0, 1]`.
    pub position: S,
    pub mean: S,
    pub lo: S,
    pub hi: S,
}

/// Linear interpolation of `series` at `grid` evenly spaced relative
/// positions `i / (grid - 1)`.
pub fn resample<S: Scalar>(series: &[S], grid: usize) -> Vec<S> {
    let n = series.len();
    if n == 1 || grid == 1 {
        return vec![series[0]; grid];
    }
    (0..grid)
        .map(|i| {
            let x = S::of_usize(i) * S::of_usize(n - 1) / S::of_usize(grid - 1);
            let lo = x.floor().to_usize().unwrap_or(0).min(n - 2);
            let frac = x - S::of_usize(lo);
            series[lo] + (series[lo + 1] - series[lo]) * frac
        })
        .collect()
}

/// Mean ± 1.96 standard errors (sample standard deviation) across traces at
/// each grid position.
pub fn confidence_bands<S: Scalar>(
    traces: &[Vec<LoadPoint<S>>],
    component: LoadComponent,
) -> Result<Vec<Band<S>>> {
    if traces.len() < 2 {
        return Err(Error::TooFewTraces {
            needed: 2,
            got: traces.len(),
        });
    }
    if let Some(t) = traces.iter().find(|t| t.is_empty()) {
        return Err(Error::TooFewPoints {
            needed: 1,
            got: t.len(),
        });
    }
    let grids: Vec<Vec<S>> = traces
        .iter()
        .map(|t| {
            resample(
                &t.iter().map(|p| component.of(p)).collect::<Vec<_>>(),
                BAND_GRID,
            )
        })
        .collect();
    let n = S::of_usize(grids.len());
    Ok((0..BAND_GRID)
        .map(|i| {
            let mean = grids.iter().map(|g| g[i]).sum::<S>() / n;
            let ss: S = grids.iter().map(|g| (g[i] - mean) * (g[i] - mean)).sum();
            let se = (ss / (n - S::one())).sqrt() / n.sqrt();
            let half = S::of(Z95) * se;
            Band {
                position: S::of_usize(i) / S::of_usize(BAND_GRID - 1),
                mean,
                lo: mean - half,
                hi: mean + half,
            }
        })
        .collect())
}

pub fn export_bands<S: Scalar>(
    traces: &[Vec<LoadPoint<S>>],
    component: LoadComponent,
) -> Result<Figure> {
    let bands = confidence_bands(traces, component)?;
    let mut table = Table::new(["position", "mean", "lo", "hi"]);
    for b in &bands {
        table.row([num(b.position), num(b.mean), num(b.lo), num(b.hi)]);
    }
    let frame = Frame {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };
    let mut svg = Svg::standard();
    frame.draw_axes(&mut svg, "relative position", component.name());
    let mut area: Vec<_> = bands
        .iter()
        .map(|b| frame.map(b.position.as_f64(), b.hi.as_f64()))
        .collect();
    area.extend(
        bands
            .iter()
            .rev()
            .map(|b| frame.map(b.position.as_f64(), b.lo.as_f64())),
    );
    let color = PALETTE[0];
    svg.polygon(
        &area,
        &format!(r#"fill="{color}" fill-opacity="0.25" stroke="none" class="band""#),
    );
    let line: Vec<_> = bands
        .iter()
        .map(|b| frame.map(b.position.as_f64(), b.mean.as_f64()))
        .collect();
    svg.polyline(
        &line,
        &format!(r#"stroke="{color}" stroke-width="2" class="mean""#),
    );
    Ok(Figure {
        name: format!("bands_{}", component.name().to_ascii_lowercase()),
        csv: table.finish(),
        svg: svg.finish(&format!(
            "{} confidence band ({} traces)",
            component.name(),
            traces.len()
        )),
    })
}
