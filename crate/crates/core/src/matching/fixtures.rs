//! Published solution tables (three significant digits), non-harmonic roots only.

/// `(odd_m, N, rows)`.
pub const TABLES: &[(bool, usize, &[&[f64]])] = &[
    (true, 0, &[&[1.0]]),
    (false, 0, &[&[1.0]]),
    (true, 1, &[&[0.0, 0.577]]),
    (false, 1, &[&[0.0, 0.577], &[0.447, 0.365]]),
    (true, 2, &[]),
    (false, 2, &[&[0.206, 0.215, -0.467], &[0.274, 0.255, 0.203], &[0.367, 0.507, -0.250], &[0.649, 0.293, -0.189]]),
    (
        true,
        3,
        &[
            &[0.0, 0.286, 0.0, 0.433],
            &[0.0, 0.331, 0.0, -0.262],
            &[0.0, 0.617, 0.0, 0.171],
            &[0.272, 0.056, 0.308, -0.492],
            &[0.384, 0.219, 0.241, 0.366],
            &[0.526, 0.280, -0.263, 0.378],
        ],
    ),
    (
        false,
        3,
        &[
            &[0.0, 0.286, 0.0, -0.433],
            &[0.0, 0.331, 0.0, 0.262],
            &[0.0, 0.617, 0.0, -0.171],
            &[0.162, 0.030, -0.324, 0.310],
            &[0.135, 0.138, 0.146, -0.503],
            &[0.335, 0.139, -0.190, -0.252],
            &[0.284, 0.152, -0.138, 0.432],
            &[0.578, 0.160, 0.217, -0.241],
            &[0.197, 0.190, 0.169, 0.139],
            &[0.745, 0.229, -0.182, 0.124],
            &[0.235, 0.270, 0.390, -0.339],
            &[0.454, 0.321, 0.027, -0.164],
            &[0.540, 0.407, -0.288, 0.147],
            &[0.096, 0.430, 0.246, -0.290],
            &[0.268, 0.551, -0.200, -0.044],
        ],
    ),
    (
        true,
        4,
        &[
            &[0.272, 0.056, 0.308, -0.492, 0.0],
            &[0.384, 0.219, 0.241, 0.366, 0.0],
            &[0.526, 0.280, -0.263, 0.378, 0.0],
            &[0.266, 0.261, 0.053, 0.365, -0.186],
            &[0.015, 0.265, -0.205, 0.351, -0.348],
            &[0.156, 0.364, -0.221, -0.158, -0.430],
            &[0.165, 0.130, 0.026, 0.432, 0.430],
            &[0.375, 0.382, -0.000, -0.139, -0.348],
        ],
    ),
    (
        false,
        4,
        &[
            &[0.00507, 0.156, 0.254, -0.152, 0.331],
            &[0.0113, 0.177, -0.209, -0.200, 0.323],
            &[0.0398, 0.354, -0.252, 0.155, 0.309],
            &[0.0638, 0.268, 0.370, -0.00263, -0.239],
            &[0.101, 0.102, 0.106, 0.111, -0.521],
            &[0.109, 0.264, -0.103, -0.0431, 0.416],
            &[0.116, 0.286, -0.137, -0.0581, -0.286],
            &[0.118, 0.0649, -0.0855, -0.305, 0.367],
            &[0.130, 0.0308, -0.170, -0.286, -0.223],
            &[0.153, 0.150, 0.140, 0.125, 0.105],
            &[0.174, 0.188, 0.233, 0.319, -0.390],
            &[0.182, 0.290, -0.432, -0.0747, -0.0239],
            &[0.206, 0.406, 0.0189, 0.0982, -0.209],
            &[0.210, 0.155, 0.0123, -0.151, 0.465],
            &[0.215, 0.588, -0.186, -0.0964, 0.122],
            &[0.228, 0.181, 0.484, -0.249, -0.0914],
            &[0.264, 0.166, -0.0465, -0.199, -0.186],
            &[0.283, 0.0848, 0.349, 0.209, -0.349],
            &[0.285, 0.464, 0.0109, -0.270, 0.196],
            &[0.298, 0.148, -0.0825, 0.436, -0.0631],
            &[0.324, 0.117, -0.110, 0.101, -0.414],
            &[0.342, 0.111, -0.236, -0.224, 0.0429],
            &[0.361, 0.291, 0.123, -0.0475, -0.136],
            &[0.363, 0.0968, -0.119, 0.152, 0.278],
            &[0.390, 0.343, 0.143, -0.361, 0.220],
            &[0.416, 0.229, 0.0212, 0.273, -0.306],
            &[0.425, 0.483, -0.278, 0.0722, 0.0480],
            &[0.505, 0.138, -0.402, 0.0699, -0.218],
            &[0.544, 0.111, 0.136, 0.173, -0.269],
            &[0.569, 0.128, 0.263, -0.209, -0.0422],
            &[0.579, 0.309, -0.0885, -0.0870, 0.129],
            &[0.640, 0.333, -0.270, 0.187, -0.102],
            &[0.663, 0.197, 0.0636, -0.216, 0.171],
            &[0.800, 0.185, -0.160, 0.127, -0.0911],
        ],
    ),
];

pub const TOLERANCE: f64 = 5e-3;

pub fn table(odd_m: bool, n: usize) -> Option<&'static [&'static [f64]]> {
    TABLES.iter().find(|(o, nn, _)| *o == odd_m && *nn == n).map(|t| t.2)
}

/// Result of comparing computed roots against a published table.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    /// Published rows with no computed root within tolerance (orbit-aware).
    pub missing: Vec<Vec<f64>>,
    /// Published rows matched only through a non-identity orbit member.
    pub orbit_equivalent: Vec<Vec<f64>>,
    /// Computed non-harmonic roots that match no published row.
    pub extra: Vec<Vec<f64>>,
    pub expected: usize,
    pub found: usize,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.expected == self.found
    }
}

fn close(x: &[f64], y: &[f64]) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= TOLERANCE)
}

/// Compares canonical non-harmonic roots with the table for `(odd_m, n)`.
pub fn compare(odd_m: bool, n: usize, roots: &[Vec<f64>]) -> Option<Comparison> {
    let rows = table(odd_m, n)?;
    let mut missing = Vec::new();
    let mut orbit_equivalent = Vec::new();
    let mut used = vec![false; roots.len()];
    for row in rows {
        if let Some(i) = roots.iter().position(|r| close(r, row)) {
            used[i] = true;
            continue;
        }
        match roots.iter().position(|r| super::orbit(row).iter().any(|o| close(r, o))) {
            Some(i) => {
                used[i] = true;
                orbit_equivalent.push(row.to_vec());
            }
            None => missing.push(row.to_vec()),
        }
    }
    let extra = roots.iter().zip(&used).filter(|(_, u)| !**u).map(|(r, _)| r.clone()).collect();
    Some(Comparison { missing, orbit_equivalent, extra, expected: rows.len(), found: roots.len() })
}
