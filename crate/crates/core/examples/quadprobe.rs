//! Direct check of the band quadrature identity int k2 mu^{1/2} = 2 nu mu^{1/2}
//! without grid interpolation.
use ghost_kinetics::kinetics::operator::{gauss_legendre, nu_at};
use ghost_kinetics::LocalMaxwellian;

fn main() {
    let m = LocalMaxwellian::new(1.0, 1.0);
    let q0 = 1.0;
    let t = 1.0f64;
    let c2 = 4.0 * q0 * m.density() / (2.0 * std::f64::consts::PI * t).sqrt();
    let inv8t = 1.0 / (8.0 * t);
    let sqrt8t = (8.0 * t).sqrt();
    let (rx, rw) = gauss_legendre(32);
    let (xx, xw) = gauss_legendre(16);
    let nphi = 24;
    let xi_span = 5.0f64;
    for &vv in &[[0.75f64, 0.75, 0.75], [2.25, 0.75, 0.75], [3.75, 2.25, 0.75], [5.25, 5.25, 5.25]] {
        let vnorm = (vv[0]*vv[0]+vv[1]*vv[1]+vv[2]*vv[2]).sqrt();
        let vhat = [vv[0]/vnorm, vv[1]/vnorm, vv[2]/vnorm];
        let e1 = {
            let a = if vhat[0].abs() <= vhat[1].abs() && vhat[0].abs() <= vhat[2].abs() { [1.0,0.0,0.0] }
                    else if vhat[1].abs() <= vhat[2].abs() { [0.0,1.0,0.0] } else { [0.0,0.0,1.0] };
            let mut e = [vhat[1]*a[2]-vhat[2]*a[1], vhat[2]*a[0]-vhat[0]*a[2], vhat[0]*a[1]-vhat[1]*a[0]];
            let n = (e[0]*e[0]+e[1]*e[1]+e[2]*e[2]).sqrt();
            e[0]/=n; e[1]/=n; e[2]/=n; e
        };
        let e2 = [vhat[1]*e1[2]-vhat[2]*e1[1], vhat[2]*e1[0]-vhat[0]*e1[2], vhat[0]*e1[1]-vhat[1]*e1[0]];
        let rmax = vnorm + 3.0f64.sqrt()*6.0 + 0.1;
        let mut acc = 0.0;
        for (&xr, &wr) in rx.iter().zip(&rw) {
            let r = 0.5*rmax*(xr+1.0);
            let jr = 0.5*rmax*wr;
            let xi_lo = ((r - 2.0*vnorm)/sqrt8t).max(-xi_span);
            let xi_hi = ((r + 2.0*vnorm)/sqrt8t).min(xi_span);
            if xi_lo >= xi_hi { continue; }
            let mid = 0.5*(xi_hi+xi_lo); let half = 0.5*(xi_hi-xi_lo);
            let radial = c2 * r * (-inv8t*r*r).exp();
            for (&xxi, &xwi) in xx.iter().zip(&xw) {
                let xi = mid + half*xxi;
                let tt = (sqrt8t*xi - r)/(2.0*vnorm);
                if !(-1.0..=1.0).contains(&tt) { continue; }
                let st = (1.0 - tt*tt).max(0.0).sqrt();
                let jxi = half*xwi*sqrt8t/(2.0*vnorm);
                let band = (-xi*xi).exp();
                for k in 0..nphi {
                    let phi = (k as f64 + 0.5)*2.0*std::f64::consts::PI/nphi as f64;
                    let (sp, cp) = phi.sin_cos();
                    let n = [tt*vhat[0]+st*(cp*e1[0]+sp*e2[0]), tt*vhat[1]+st*(cp*e1[1]+sp*e2[1]), tt*vhat[2]+st*(cp*e1[2]+sp*e2[2])];
                    let u = [vv[0]+r*n[0], vv[1]+r*n[1], vv[2]+r*n[2]];
                    acc += jr*jxi*(2.0*std::f64::consts::PI/nphi as f64)*radial*band*m.eval_sqrt(u);
                }
            }
        }
        let target = 2.0*nu_at(&m, q0, vv)*m.eval_sqrt(vv);
        println!("v={vv:?}: quad={acc:.8e} target={target:.8e} rel={:.2e}", (acc-target).abs()/target);
    }
}
