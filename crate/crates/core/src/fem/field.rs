use crate::error::{Error, Result};

macro_rules! nodal_field {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(Vec<[f64; 3]>);

        impl $name {
            pub fn zeros(node_count: usize) -> Self {
                Self(vec![[0.0; 3]; node_count])
            }

            pub fn from_vec(values: Vec<[f64; 3]>) -> Result<Self> {
                if values.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::Conformance(format!(
                        "{} contains non-finite entries",
                        stringify!($name)
                    )));
                }
                Ok(Self(values))
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn as_slice(&self) -> &[[f64; 3]] {
                &self.0
            }

            /// Interleaved `x0, y0, z0, x1, ...` view.
            pub fn flat(&self) -> &[f64] {
                self.0.as_flattened()
            }

            pub fn into_inner(self) -> Vec<[f64; 3]> {
                self.0
            }
        }

        impl std::ops::Index<usize> for $name {
            type Output = [f64; 3];
            fn index(&self, i: usize) -> &[f64; 3] {
                &self.0[i]
            }
        }
    };
}

nodal_field!(
    /// Per-node displacement (m). Fixed nodes carry zeros.
    DisplacementField
);

nodal_field!(
    /// Per-node external force (N).
    ForceField
);

impl ForceField {
    pub(crate) fn from_flat(flat: &[f64]) -> Self {
        Self(flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }
}

/// Componentwise sum of `field` over `nodes`.
pub fn resultant(field: &ForceField, nodes: &[usize]) -> [f64; 3] {
    let mut s = [0.0; 3];
    for &i in nodes {
        for k in 0..3 {
            s[k] += field[i][k];
        }
    }
    s
}
