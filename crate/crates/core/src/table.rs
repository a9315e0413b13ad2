//! Delimited-text export of patterns, function estimates, grids, and
//! rasters.
//!
//! Coordinates and statistic values are written with Rust's shortest
//! round-trip float formatting, so exporting a pattern and re-ingesting it
//! reproduces the coordinates bit for bit, and repeated runs emit
//! byte-identical files.

use std::io::Write;

use crate::error::Result;
use crate::intensity::{IntensitySurface, Raster};
use crate::patterns::{Mark, MarkedPattern, PointPattern, STPattern, TemporalHistogram};
use crate::secondorder::{EnvelopeRun, FunctionEstimate};
use crate::spacetime::STGrid;

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// `x,y` table of a point pattern.
pub fn write_points<W: Write>(w: &mut W, pattern: &PointPattern) -> Result<()> {
    writeln!(w, "x,y")?;
    for p in pattern.points() {
        writeln!(w, "{},{}", fmt(p.x), fmt(p.y))?;
    }
    Ok(())
}

/// `x,y,label` table of a marked pattern.
pub fn write_marked<W: Write>(
    w: &mut W,
    pattern: &MarkedPattern,
    case_value: &str,
    control_value: &str,
) -> Result<()> {
    writeln!(w, "x,y,label")?;
    for (p, m) in pattern.base().points().iter().zip(pattern.marks()) {
        let label = match m {
            Mark::Case => case_value,
            Mark::Control => control_value,
        };
        writeln!(w, "{},{},{label}", fmt(p.x), fmt(p.y))?;
    }
    Ok(())
}

/// `x,y,t` table of a space-time pattern.
pub fn write_st<W: Write>(w: &mut W, pattern: &STPattern) -> Result<()> {
    writeln!(w, "x,y,t")?;
    for (p, t) in pattern.points().iter().zip(pattern.times()) {
        writeln!(w, "{},{},{}", fmt(p.x), fmt(p.y), fmt(*t))?;
    }
    Ok(())
}

/// `(s, value, lower, upper, theoretical)` table; absent columns are empty.
pub fn write_function_estimate<W: Write>(w: &mut W, est: &FunctionEstimate) -> Result<()> {
    writeln!(w, "s,value,lower,upper,theoretical")?;
    for (i, (&s, &v)) in est.grid.iter().zip(&est.values).enumerate() {
        let lower = est
            .envelope
            .as_ref()
            .map(|e| fmt(e.lower[i]))
            .unwrap_or_default();
        let upper = est
            .envelope
            .as_ref()
            .map(|e| fmt(e.upper[i]))
            .unwrap_or_default();
        let theo = est
            .theoretical
            .as_ref()
            .map(|t| fmt(t[i]))
            .unwrap_or_default();
        writeln!(w, "{},{},{lower},{upper},{theo}", fmt(s), fmt(v))?;
    }
    Ok(())
}

/// Envelope companion table: `(s, lower, upper, mean, se)`.
pub fn write_envelope_bands<W: Write>(w: &mut W, run: &EnvelopeRun) -> Result<()> {
    writeln!(w, "s,lower,upper,mean,se")?;
    let env = run
        .estimate
        .envelope
        .as_ref()
        .expect("envelope run carries an envelope");
    for (i, &s) in run.estimate.grid.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(s),
            fmt(env.lower[i]),
            fmt(env.upper[i]),
            fmt(run.mean[i]),
            fmt(run.se[i])
        )?;
    }
    Ok(())
}

/// Matrix table with an `s\t` header row carrying the t grid.
pub fn write_st_grid<W: Write>(w: &mut W, grid: &STGrid) -> Result<()> {
    write!(w, "s\\t")?;
    for &t in grid.t_values() {
        write!(w, ",{}", fmt(t))?;
    }
    writeln!(w)?;
    for (si, &s) in grid.s_values().iter().enumerate() {
        write!(w, "{}", fmt(s))?;
        for ti in 0..grid.t_values().len() {
            write!(w, ",{}", fmt(grid.get(si, ti)))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Row-major raster values preceded by `#`-comment geometry headers.
pub fn write_raster<W: Write>(w: &mut W, raster: &Raster, extra: &[(&str, String)]) -> Result<()> {
    writeln!(w, "# origin_x={}", fmt(raster.origin.x))?;
    writeln!(w, "# origin_y={}", fmt(raster.origin.y))?;
    writeln!(w, "# cell_width={}", fmt(raster.cell_width))?;
    writeln!(w, "# cell_height={}", fmt(raster.cell_height))?;
    writeln!(w, "# nx={}", raster.nx)?;
    writeln!(w, "# ny={}", raster.ny)?;
    for (key, value) in extra {
        writeln!(w, "# {key}={value}")?;
    }
    for iy in 0..raster.ny {
        let mut line = String::new();
        for ix in 0..raster.nx {
            if ix > 0 {
                line.push(',');
            }
            line.push_str(&fmt(raster.get(ix, iy)));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Intensity surface with bandwidth/variant headers.
pub fn write_intensity<W: Write>(w: &mut W, surface: &IntensitySurface) -> Result<()> {
    let variant = match surface.variant {
        crate::intensity::IntensityVariant::Raw => "raw",
        crate::intensity::IntensityVariant::Normalized => "normalized",
    };
    write_raster(
        w,
        &surface.raster,
        &[
            ("bandwidth", fmt(surface.bandwidth)),
            ("variant", variant.to_string()),
            ("n_events", surface.n_events.to_string()),
        ],
    )
}

/// `(bin_index, bin_start, count)` table.
pub fn write_histogram<W: Write>(w: &mut W, hist: &TemporalHistogram) -> Result<()> {
    writeln!(w, "bin,start,count")?;
    for (i, &c) in hist.counts.iter().enumerate() {
        writeln!(w, "{i},{},{c}", fmt(i as f64 * hist.bin_width))?;
    }
    Ok(())
}
