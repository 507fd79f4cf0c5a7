use nalgebra::{DMatrix, DVector};
use ro_init::qcqp::StateLayout;

fn sym_pair(n: usize, pairs: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, v) in pairs {
        m[(i, j)] += v / 2.0;
        m[(j, i)] += v / 2.0;
    }
    m
}

/// Hand-coded examples for the planar static layout, as homogeneous forms.
pub fn hand_derived_constraints(layout: &StateLayout) -> Vec<(String, DMatrix<f64>)> {
    let n = layout.n();
    let h = layout.h();
    let (r, p) = layout.pose_offsets();
    // column-major storage: r1 = R11, r2 = R12, r3 = R21, r4 = R22
    let (r1, r2, r3, r4) = (r, r + 2, r + 1, r + 3);
    let mut out = vec![
        ("h(r1 - r4)".to_string(), sym_pair(n, &[(h, r1, 1.0), (h, r4, -1.0)])),
        ("h(r2 + r3)".to_string(), sym_pair(n, &[(h, r2, 1.0), (h, r3, 1.0)])),
    ];
    for (e, ep) in layout.epochs().iter().enumerate() {
        let y_ul = layout.tags()[ep.l][1];
        let t = layout.tag_offset(e);
        let z = layout.norm_offset(e);
        out.push((
            format!("z{e}(r1 - r4)"),
            sym_pair(n, &[(z, r1, 1.0), (z, r4, -1.0)]),
        ));
        for (axis, rot) in [(0, r2), (1, r4)] {
            let mut a = DVector::zeros(n);
            a[t + axis] = 1.0;
            a[p + axis] = -1.0;
            let mut b = DVector::zeros(n);
            b[rot] = y_ul;
            let ab = &a * b.transpose();
            out.push((
                format!("lever arm e{e} axis {axis}"),
                &a * a.transpose() - (&ab + ab.transpose()) * 0.5,
            ));
        }
    }
    out
}

