//! Layout drawings: the strip, one rectangle per object and one shaded
//! polygon per nonzero clearance side. The strip's bottom edge is at the
//! bottom of the image.

use std::fmt::Write;

use clearpack::{Dir, Instance, PackingSolution, Rational};

pub const DEFAULT_SCALE: f64 = 6.0;
const PAD: f64 = 10.0;

struct Canvas {
    scale: f64,
    height: f64,
}

impl Canvas {
    fn x(&self, v: f64) -> f64 {
        PAD + v * self.scale
    }

    fn y(&self, v: f64) -> f64 {
        PAD + (self.height - v) * self.scale
    }

    /// Points of the box `[x0, x1] × [y0, y1]` in image coordinates.
    fn points(&self, x0: f64, x1: f64, y0: f64, y1: f64) -> String {
        [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", self.x(x), self.y(y)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn f(v: &Rational) -> f64 {
    v.to_f64()
}

pub fn render(inst: &Instance, sol: &PackingSolution, scale: f64) -> String {
    let w = f(&inst.region().w);
    let h = f(&sol.h).max(f(&PackingSolution::height_used(inst, &sol.centers)));
    let c = Canvas { scale, height: h };
    let (pw, ph) = (w * scale + 2.0 * PAD, h * scale + 2.0 * PAD);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{pw:.3}" height="{ph:.3}" viewBox="0 0 {pw:.3} {ph:.3}">"#).unwrap();
    writeln!(s, r##"<defs><pattern id="hatch" width="4" height="4" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><line x1="0" y1="0" x2="0" y2="4" stroke="#888" stroke-width="1"/></pattern></defs>"##).unwrap();
    writeln!(
        s,
        r##"<rect class="strip" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#000" stroke-width="1"/>"##,
        c.x(0.0),
        c.y(h),
        w * scale,
        h * scale
    )
    .unwrap();
    for o in inst.objects() {
        let (cx, cy) = (f(sol.center(o.id, Dir::X)), f(sol.center(o.id, Dir::Y)));
        let (hx, hy) = (f(o.dim(Dir::X)) / 2.0, f(o.dim(Dir::Y)) / 2.0);
        let (x0, x1, y0, y1) = (cx - hx, cx + hx, cy - hy, cy + hy);
        let sides = [
            (Dir::X, false, (x0 - f(o.clear.minus(Dir::X)), x0, y0, y1)),
            (Dir::X, true, (x1, x1 + f(o.clear.plus(Dir::X)), y0, y1)),
            (Dir::Y, false, (x0, x1, y0 - f(o.clear.minus(Dir::Y)), y0)),
            (Dir::Y, true, (x0, x1, y1, y1 + f(o.clear.plus(Dir::Y)))),
        ];
        for (d, plus, (a, b, p, q)) in sides {
            let sigma = if plus { o.clear.plus(d) } else { o.clear.minus(d) };
            if sigma.is_zero() {
                continue;
            }
            let side = format!("{d}{}", if plus { "+" } else { "-" });
            writeln!(
                s,
                r##"<polygon class="clearance" data-object="{}" data-side="{side}" points="{}" fill="url(#hatch)" stroke="#888" stroke-width="0.5"/>"##,
                o.id,
                c.points(a, b, p, q)
            )
            .unwrap();
        }
        writeln!(
            s,
            r##"<rect class="object" data-object="{}" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#9ecae1" stroke="#08519c" stroke-width="1"/>"##,
            o.id,
            c.x(x0),
            c.y(y1),
            (x1 - x0) * scale,
            (y1 - y0) * scale
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="{:.1}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            c.x(cx),
            c.y(cy),
            (2.0 * scale).max(8.0),
            o.id
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use clearpack::rational::qi;
    use clearpack::{Clearance, ObjectSpec, Region};

    #[test]
    fn one_polygon_per_nonzero_side() {
        let a = ObjectSpec::new(1, qi(2), qi(2), Clearance::new(qi(1), qi(0), qi(0), qi(2)));
        let b = ObjectSpec::new(2, qi(2), qi(4), Clearance::zero());
        let inst = Instance::new(Region { w: qi(10), h: qi(10) }, vec![a, b]).unwrap();
        let sol = PackingSolution { centers: vec![[qi(2), qi(1)], [qi(6), qi(2)]], h: qi(4) };
        let svg = render(&inst, &sol, DEFAULT_SCALE);
        assert_eq!(svg.matches(r#"class="object""#).count(), 2);
        assert_eq!(svg.matches(r#"class="clearance""#).count(), 2);
        // 10 units at 6 px plus padding
        assert!(svg.contains(r#"width="80.000""#));
    }
}
