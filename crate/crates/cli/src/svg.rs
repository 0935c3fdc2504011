//! Self-contained SVG plots of decay curves: linear `t` axis, logarithmic
//! measure axis, measured points and the fitted model.

use std::fmt::Write;

use sparse_harmonics::harness::DecayCurve;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn decay_plot(curve: &DecayCurve, title: &str) -> String {
    let pts: Vec<(f64, f64)> = curve
        .t
        .iter()
        .zip(&curve.measure)
        .filter(|(_, m)| **m > 0.0)
        .map(|(t, m)| (*t, m.log10()))
        .collect();
    let t_max = curve.t.iter().copied().fold(0.0, f64::max).max(1e-12);
    let y_min = pts.iter().map(|p| p.1).fold(0.0, f64::min).floor().min(-1.0);
    let sx = |t: f64| LEFT + (W - LEFT - RIGHT) * t / t_max;
    let sy = |y: f64| TOP + (H - TOP - BOTTOM) * (y / y_min);
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    writeln!(s, r#"<path d="M{x0} {y0}V{y1}H{x1}" fill="none" stroke="black"/>"#).unwrap();
    for k in (y_min as i32)..=0 {
        let y = sy(k as f64);
        writeln!(s, r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/>"##).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{k}</text>"#, x0 - 6.0, y + 4.0).unwrap();
    }
    for k in 0..=5 {
        let t = t_max * k as f64 / 5.0;
        writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{:.3}</text>"#, sx(t), y1 + 18.0, t).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, (x0 + x1) / 2.0, H - 10.0).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">measure</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();
    if let Some(fit) = curve.fit {
        let mut d = String::new();
        for k in 0..=200 {
            let t = t_max * k as f64 / 200.0;
            let v = fit.model(t);
            if v <= 0.0 {
                continue;
            }
            let y = v.log10().clamp(y_min, 0.0);
            let _ = write!(d, "{}{:.2} {:.2}", if d.is_empty() { "M" } else { "L" }, sx(t), sy(y));
        }
        writeln!(s, r##"<path d="{d}" fill="none" stroke="#c33" stroke-width="1.5"/>"##).unwrap();
        writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="end" fill="#c33">c exp(-a t^p): c = {:.4}, a = {:.4}, p = {:.4}, R2 = {:.4}</text>"##,
            x1,
            y0 - 6.0,
            fit.c,
            fit.alpha,
            fit.p,
            fit.r2
        )
        .unwrap();
    }
    for (t, y) in pts {
        writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#236"/>"##, sx(t), sy(y)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
