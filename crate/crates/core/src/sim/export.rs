use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DataUtilityMap, GameReport, SimError, UtilitySurface};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy)]
pub enum Artifact<'a> {
    Surface(&'a UtilitySurface),
    Map(&'a DataUtilityMap),
    Game(&'a GameReport),
}

/// Writes `artifact` to `path`, replacing any existing file.
pub fn export_results(artifact: Artifact<'_>, format: ExportFormat, path: &Path) -> Result<(), SimError> {
    let bytes = match (artifact, format) {
        (Artifact::Surface(s), ExportFormat::Csv) => surface_csv(s)?,
        (Artifact::Map(m), ExportFormat::Csv) => map_csv(m)?,
        (Artifact::Game(g), ExportFormat::Csv) => game_csv(g)?,
        (Artifact::Surface(s), ExportFormat::Json) => json(s)?,
        (Artifact::Map(m), ExportFormat::Json) => json(m)?,
        (Artifact::Game(g), ExportFormat::Json) => json(g)?,
        (Artifact::Surface(s), ExportFormat::Svg) => surface_svg(s).into_bytes(),
        (Artifact::Map(m), ExportFormat::Svg) => map_svg(m).into_bytes(),
        (Artifact::Game(g), ExportFormat::Svg) => game_svg(g).into_bytes(),
    };
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

fn json<T: serde::Serialize>(v: &T) -> Result<Vec<u8>, SimError> {
    let mut out = serde_json::to_vec_pretty(v)?;
    out.push(b'\n');
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Vec<u8>, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| SimError::Io(e.into_error()))
}

/// Columns `eps_1..eps_K, u_ma, w_mp_1.., u_mp_1.., share_1.., se_ma`.
pub fn surface_csv(s: &UtilitySurface) -> Result<Vec<u8>, SimError> {
    let k = s.axes.len();
    let mut header: Vec<String> = (1..=k).map(|i| format!("eps_{i}")).collect();
    header.push("u_ma".into());
    header.extend((1..=k).map(|i| format!("w_mp_{i}")));
    header.extend((1..=k).map(|i| format!("u_mp_{i}")));
    header.extend((1..=k).map(|i| format!("share_{i}")));
    header.push("se_ma".into());
    let rows = s
        .cells
        .iter()
        .map(|c| {
            let mut r: Vec<String> = c.eps.iter().map(|&e| num(e)).collect();
            r.push(num(c.u_ma));
            r.extend(c.w_mp.iter().map(|&v| num(v)));
            r.extend(c.u_mp.iter().map(|&v| num(v)));
            r.extend(c.share.iter().map(|&b| (b as u8).to_string()));
            r.push(num(c.se_ma));
            r
        })
        .collect();
    csv_bytes(header, rows)
}

/// Columns `family, q_hat_vph, q_vph, delay_s`.
pub fn map_csv(m: &DataUtilityMap) -> Result<Vec<u8>, SimError> {
    let mut rows = Vec::new();
    for f in &m.families {
        for (i, q) in f.q_vph.iter().enumerate() {
            for (j, qh) in f.q_hat_vph.iter().enumerate() {
                rows.push(vec![f.family.name().to_string(), num(*qh), num(*q), num(f.delay[i][j])]);
            }
        }
    }
    csv_bytes(["family", "q_hat_vph", "q_vph", "delay_s"].map(String::from).to_vec(), rows)
}

/// One row per leader grid point.
pub fn game_csv(g: &GameReport) -> Result<Vec<u8>, SimError> {
    let k = g.leader_choice.len();
    let mut header: Vec<String> = (1..=k).map(|i| format!("d_{i}")).collect();
    header.extend((1..=k).map(|i| format!("floor_{i}")));
    header.push("region".into());
    header.extend((1..=k).map(|i| format!("share_prob_{i}")));
    header.extend((1..=k).map(|i| format!("eps_{i}")));
    header.push("leader_value".into());
    header.push("fallback".into());
    let rows = g
        .regions
        .iter()
        .map(|r| {
            let mut row: Vec<String> = r.d.iter().map(|&v| num(v)).collect();
            match &r.floors {
                Some(f) => row.extend(f.iter().map(|&v| num(v))),
                None => row.extend((0..k).map(|_| String::new())),
            }
            row.push(r.region.name().into());
            row.extend(r.share_prob.iter().map(|&v| num(v)));
            row.extend(r.eps.iter().map(|&v| num(v)));
            row.push(num(r.leader_value));
            row.push((r.fallback as u8).to_string());
            row
        })
        .collect();
    csv_bytes(header, rows)
}

const CELL: f64 = 44.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

struct Panel<'a> {
    title: String,
    x_name: &'a str,
    y_name: &'a str,
    xs: Vec<String>,
    ys: Vec<String>,
    /// `z[row][col]`, row 0 drawn at the bottom.
    z: Vec<Vec<f64>>,
}

fn color(t: f64) -> String {
    // blue, pale yellow, red
    let stops = [(49.0, 54.0, 149.0), (255.0, 255.0, 191.0), (165.0, 0.0, 38.0)];
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let (a, b, u) = if t < 0.5 { (stops[0], stops[1], t * 2.0) } else { (stops[1], stops[2], t * 2.0 - 1.0) };
    let mix = |p: f64, q: f64| (p + (q - p) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn panel_height(p: &Panel<'_>) -> f64 {
    MARGIN_T + CELL * p.ys.len() as f64 + MARGIN_B
}

fn draw_panel(out: &mut String, p: &Panel<'_>, y0: f64) {
    let lo = p.z.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = p.z.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let rows = p.ys.len() as f64;
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN_L}" y="{}" font-size="14">{} (min {:.3}, max {:.3})</text>"#,
        y0 + 24.0,
        p.title,
        lo,
        hi
    );
    for (r, row) in p.z.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let x = MARGIN_L + CELL * c as f64;
            let y = y0 + MARGIN_T + CELL * (rows - 1.0 - r as f64);
            let _ = writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"><title>{v}</title></rect>"#,
                color((v - lo) / span)
            );
        }
    }
    let base = y0 + MARGIN_T + CELL * rows;
    for (c, l) in p.xs.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="middle">{l}</text>"#,
            MARGIN_L + CELL * (c as f64 + 0.5),
            base + 14.0
        );
    }
    for (r, l) in p.ys.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{l}</text>"#,
            MARGIN_L - 6.0,
            y0 + MARGIN_T + CELL * (rows - r as f64 - 0.5) + 3.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        MARGIN_L + CELL * p.xs.len() as f64 / 2.0,
        base + 34.0,
        p.x_name
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" font-size="12" transform="rotate(-90 14 {})" text-anchor="middle">{}</text>"#,
        y0 + MARGIN_T + CELL * rows / 2.0,
        y0 + MARGIN_T + CELL * rows / 2.0,
        p.y_name
    );
}

fn render(panels: &[Panel<'_>]) -> String {
    let width = panels.iter().map(|p| MARGIN_L + CELL * p.xs.len() as f64 + 20.0).fold(240.0, f64::max);
    let height: f64 = panels.iter().map(panel_height).sum();
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" font-family="sans-serif">"#
    );
    let mut y = 0.0;
    for p in panels {
        draw_panel(&mut out, p, y);
        y += panel_height(p);
    }
    out.push_str("</svg>\n");
    out
}

fn label(v: f64) -> String {
    format!("{v:.2}")
}

/// Heatmaps of the leader's utility and each provider's net utility over
/// the first two budget axes (further axes at their largest value).
pub fn surface_svg(s: &UtilitySurface) -> String {
    let k = s.axes.len();
    let fixed: Vec<usize> = s.axes.iter().map(|a| a.len() - 1).collect();
    let (xs, ys) = if k == 1 { (s.axes[0].clone(), vec![0.0]) } else { (s.axes[0].clone(), s.axes[1].clone()) };
    let grab = |f: &dyn Fn(&super::SurfaceCell) -> f64| -> Vec<Vec<f64>> {
        (0..ys.len())
            .map(|r| {
                (0..xs.len())
                    .map(|c| {
                        let mut idx = fixed.clone();
                        idx[0] = c;
                        if k > 1 {
                            idx[1] = r;
                        }
                        f(s.cell(&idx))
                    })
                    .collect()
            })
            .collect()
    };
    let y_name = if k > 1 { "eps_2" } else { "" };
    let mut panels = vec![Panel {
        title: "MA utility, s/veh".into(),
        x_name: "eps_1",
        y_name,
        xs: xs.iter().map(|&v| label(v)).collect(),
        ys: ys.iter().map(|&v| if k > 1 { label(v) } else { String::new() }).collect(),
        z: grab(&|c| c.u_ma),
    }];
    for i in 0..k {
        panels.push(Panel {
            title: format!("MP {} net utility", i + 1),
            x_name: "eps_1",
            y_name,
            xs: xs.iter().map(|&v| label(v)).collect(),
            ys: ys.iter().map(|&v| if k > 1 { label(v) } else { String::new() }).collect(),
            z: grab(&|c| c.u_mp[i]),
        });
    }
    render(&panels)
}

fn map_svg(m: &DataUtilityMap) -> String {
    let panels: Vec<Panel<'_>> = m
        .families
        .iter()
        .map(|f| Panel {
            title: format!("{} delay, s/veh", f.family.name()),
            x_name: "estimated demand, veh/h",
            y_name: "true demand, veh/h",
            xs: f.q_hat_vph.iter().map(|v| format!("{v:.0}")).collect(),
            ys: f.q_vph.iter().map(|v| format!("{v:.0}")).collect(),
            z: f.delay.clone(),
        })
        .collect();
    render(&panels)
}

fn game_svg(g: &GameReport) -> String {
    // region code 0/1/2 over the first two thresholds
    let mut ds1: Vec<f64> = g.regions.iter().map(|r| r.d[0]).collect();
    ds1.sort_by(f64::total_cmp);
    ds1.dedup();
    let k = g.leader_choice.len();
    let mut ds2: Vec<f64> = if k > 1 { g.regions.iter().map(|r| r.d[1]).collect() } else { vec![0.0] };
    ds2.sort_by(f64::total_cmp);
    ds2.dedup();
    let code = |r: super::Region| match r {
        super::Region::NoShare => 0.0,
        super::Region::PartialShare => 1.0,
        super::Region::FullShare => 2.0,
    };
    let mut z = vec![vec![f64::NAN; ds1.len()]; ds2.len()];
    for r in &g.regions {
        if r.d.iter().skip(2).zip(g.leader_choice.iter().skip(2)).any(|(a, b)| a != b) {
            continue;
        }
        let c = ds1.iter().position(|&v| v == r.d[0]).unwrap_or(0);
        let rr = if k > 1 { ds2.iter().position(|&v| v == r.d[1]).unwrap_or(0) } else { 0 };
        z[rr][c] = code(r.region);
    }
    for row in &mut z {
        for v in row.iter_mut() {
            if v.is_nan() {
                *v = 0.0;
            }
        }
    }
    render(&[Panel {
        title: "regions: 0 none, 1 partial, 2 full".into(),
        x_name: "d_1",
        y_name: if k > 1 { "d_2" } else { "" },
        xs: ds1.iter().map(|&v| format!("{v:.3}")).collect(),
        ys: ds2.iter().map(|&v| if k > 1 { format!("{v:.3}") } else { String::new() }).collect(),
        z,
    }])
}
