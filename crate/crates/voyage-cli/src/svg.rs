//! Static SVG plots: the current-field map with ports and endpoints,
//! trajectory overlays, and Pareto fronts. Everything is emitted as
//! plain SVG 1.1 text with fixed-precision coordinates, so identical
//! inputs produce byte-identical files.

use std::fmt::Write;

use voyage_core::dp::Trajectory;
use voyage_core::environment::EnvironmentSpec;
use voyage_core::pareto::ParetoFront;

const CANVAS: f64 = 640.0;
const MARGIN: f64 = 40.0;
const QUIVER_SIDE: usize = 20;

const FRONT_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct WorldMap {
    x1_min: f64,
    x2_min: f64,
    scale: f64,
    height: f64,
}

impl WorldMap {
    fn new(env: &EnvironmentSpec) -> WorldMap {
        let w = env.bounds.x1_max - env.bounds.x1_min;
        let h = env.bounds.x2_max - env.bounds.x2_min;
        let scale = (CANVAS - 2.0 * MARGIN) / w.max(h);
        WorldMap {
            x1_min: env.bounds.x1_min,
            x2_min: env.bounds.x2_min,
            scale,
            height: h,
        }
    }

    /// World km to SVG px; north points up.
    fn px(&self, x1: f64, x2: f64) -> (f64, f64) {
        (
            MARGIN + (x1 - self.x1_min) * self.scale,
            MARGIN + (self.height - (x2 - self.x2_min)) * self.scale,
        )
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="#f4f8fb"/>"##
    );
}

/// Quiver field plus ports, start, and terminal region.
fn draw_environment(out: &mut String, env: &EnvironmentSpec, map: &WorldMap) {
    // arrow lengths are normalized by the strongest current sampled on
    // the quiver grid itself, so a zero field degenerates to dots
    let mut speeds = Vec::with_capacity(QUIVER_SIDE * QUIVER_SIDE);
    let mut vectors = Vec::with_capacity(QUIVER_SIDE * QUIVER_SIDE);
    for i in 0..QUIVER_SIDE {
        for j in 0..QUIVER_SIDE {
            let x1 = env.bounds.x1_min
                + (i as f64 + 0.5) * (env.bounds.x1_max - env.bounds.x1_min)
                    / QUIVER_SIDE as f64;
            let x2 = env.bounds.x2_min
                + (j as f64 + 0.5) * (env.bounds.x2_max - env.bounds.x2_min)
                    / QUIVER_SIDE as f64;
            let (ve, vn) = env.current.velocity(&voyage_core::Position::new(x1, x2));
            speeds.push((ve * ve + vn * vn).sqrt());
            vectors.push((x1, x2, ve, vn));
        }
    }
    let vmax = speeds.iter().copied().fold(0.0f64, f64::max);
    let cell_px = (CANVAS - 2.0 * MARGIN) / QUIVER_SIDE as f64;
    let _ = writeln!(
        out,
        r##"<g stroke="#4477aa" stroke-width="1" fill="none">"##
    );
    for (x1, x2, ve, vn) in vectors {
        let (tx, ty) = map.px(x1, x2);
        let (mut dx, mut dy) = (0.0, 0.0);
        if vmax > 0.0 {
            let speed = (ve * ve + vn * vn).sqrt();
            let len_px = 0.85 * cell_px * speed / vmax;
            if speed > 0.0 {
                dx = ve / speed * len_px;
                dy = -vn / speed * len_px;
            }
        }
        let (hx, hy) = (tx + dx, ty + dy);
        // one path per arrow: shaft plus two head strokes
        let (bx, by) = (hx - 0.25 * dx, hy - 0.25 * dy);
        let (px_, py_) = (-0.12 * dy, 0.12 * dx);
        let _ = writeln!(
            out,
            r#"<path class="arrow" d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}"/>"#,
            tx, ty, hx, hy, hx, hy, bx + px_, by + py_, hx, hy, bx - px_, by - py_
        );
    }
    let _ = writeln!(out, "</g>");

    let (tx, ty) = map.px(env.terminal.center.x1, env.terminal.center.x2);
    let _ = writeln!(
        out,
        r##"<circle class="terminal" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#2ca02c" fill-opacity="0.25" stroke="#2ca02c" stroke-width="1.5"/>"##,
        tx,
        ty,
        env.terminal.radius * map.scale
    );
    for port in &env.ports {
        let (px_, py_) = map.px(port.position.x1, port.position.x2);
        let s = 9.0;
        let _ = writeln!(
            out,
            r##"<rect class="port" x="{:.2}" y="{:.2}" width="{s}" height="{s}" fill="#000000"/>"##,
            px_ - s / 2.0,
            py_ - s / 2.0
        );
    }
    let (sx, sy) = map.px(env.start.position.x1, env.start.position.x2);
    let _ = writeln!(
        out,
        r##"<circle class="start" cx="{sx:.2}" cy="{sy:.2}" r="5" fill="#d62728" stroke="#7a1010" stroke-width="1"/>"##
    );
}

/// Map of the ocean space: current quiver, ports, start, terminal.
pub fn environment_map(env: &EnvironmentSpec) -> String {
    let map = WorldMap::new(env);
    let mut out = String::new();
    header(&mut out);
    draw_environment(&mut out, env, &map);
    out.push_str("</svg>\n");
    out
}

/// Environment map with a trajectory overlaid; refuel stops get their
/// own markers.
pub fn trajectory_map(env: &EnvironmentSpec, trajectory: &Trajectory) -> String {
    let map = WorldMap::new(env);
    let mut out = String::new();
    header(&mut out);
    draw_environment(&mut out, env, &map);

    let mut pts = String::new();
    for step in &trajectory.steps {
        let (x, y) = map.px(step.state.position.x1, step.state.position.x2);
        let _ = write!(pts, "{x:.2},{y:.2} ");
    }
    let (fx, fy) = map.px(
        trajectory.final_state.position.x1,
        trajectory.final_state.position.x2,
    );
    let _ = write!(pts, "{fx:.2},{fy:.2}");
    let _ = writeln!(
        out,
        r##"<polyline class="trajectory" points="{pts}" fill="none" stroke="#d62728" stroke-width="2"/>"##
    );
    for step in trajectory.steps.iter().filter(|s| s.refueled) {
        let (x, y) = map.px(step.state.position.x1, step.state.position.x2);
        let _ = writeln!(
            out,
            r##"<circle class="refuel" cx="{x:.2}" cy="{y:.2}" r="6" fill="none" stroke="#ff7f0e" stroke-width="2"/>"##
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Pareto fronts, one polyline per initial fuel level.
pub fn pareto_chart(fronts: &[(f64, ParetoFront)]) -> String {
    let mut out = String::new();
    header(&mut out);
    let plot = CANVAS - 2.0 * MARGIN;

    let all: Vec<(f64, f64)> = fronts
        .iter()
        .flat_map(|(_, f)| f.points.iter().map(|p| (p.trip_time_hr, p.total_fuel_gal)))
        .collect();
    let (t_max, f_max) = all.iter().fold((1.0f64, 1.0f64), |(tm, fm), (t, f)| {
        (tm.max(*t), fm.max(*f))
    });
    let x = |t: f64| MARGIN + t / (t_max * 1.05) * plot;
    let y = |f: f64| MARGIN + plot - f / (f_max * 1.05) * plot;

    // axes
    let _ = writeln!(
        out,
        r##"<g stroke="#222222" stroke-width="1"><line x1="{m}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{m}" y1="{m}" x2="{m}" y2="{b}"/></g>"##,
        m = MARGIN,
        b = MARGIN + plot,
        r = MARGIN + plot
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.0}" y="{:.0}" font-size="13" text-anchor="middle">trip time [hr]</text>"#,
        MARGIN + plot / 2.0,
        CANVAS - 6.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.0}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.0})">fuel burned [gal]</text>"#,
        MARGIN + plot / 2.0,
        MARGIN + plot / 2.0
    );
    for i in 0..=4 {
        let t = t_max * 1.05 * i as f64 / 4.0;
        let f = f_max * 1.05 * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{t:.1}</text>"#,
            x(t),
            MARGIN + plot + 16.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{f:.1}</text>"#,
            MARGIN - 6.0,
            y(f) + 4.0
        );
    }

    for (i, (fuel, front)) in fronts.iter().enumerate() {
        let color = FRONT_COLORS[i % FRONT_COLORS.len()];
        let pts: Vec<String> = front
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.trip_time_hr), y(p.total_fuel_gal)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="front" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
        for p in &front.points {
            let _ = writeln!(
                out,
                r#"<circle class="front-point" cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                x(p.trip_time_hr),
                y(p.total_fuel_gal)
            );
        }
        let ly = MARGIN + 18.0 * i as f64 + 10.0;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="12" height="12" fill="{color}"/><text x="{:.1}" y="{:.1}" font-size="12">{fuel} gal initial</text>"#,
            MARGIN + plot - 130.0,
            ly,
            MARGIN + plot - 112.0,
            ly + 10.0
        );
    }
    out.push_str("</svg>\n");
    out
}
