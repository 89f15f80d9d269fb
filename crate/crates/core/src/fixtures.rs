//! Small crystal frameworks used throughout tests, examples and the CLI.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;


use crate::framework::{CrystalFramework, MotifEdge};
use crate::geometry::{Basis2, Vector2};

fn build(basis: Basis2, joints: Vec<Vector2>, edges: Vec<MotifEdge>) -> CrystalFramework {
    CrystalFramework::new(basis, joints, edges).expect("fixture is valid")
}

/// Unit square grid: one joint, horizontal and vertical bars.
pub fn square_grid() -> CrystalFramework {
    build(
        Basis2::standard(),
        vec![Vector2::ZERO],
        vec![MotifEdge::new(0, 0, [1, 0]), MotifEdge::new(0, 0, [0, 1])],
    )
}

/// Square grid with one diagonal per cell; infinitesimally rigid.
pub fn braced_grid() -> CrystalFramework {
    build(
        Basis2::standard(),
        vec![Vector2::ZERO],
        vec![
            MotifEdge::new(0, 0, [1, 0]),
            MotifEdge::new(0, 0, [0, 1]),
            MotifEdge::new(0, 0, [1, 1]),
        ],
    )
}

/// Kagome net with unit lattice constant and bar length 1/2.
pub fn kagome() -> CrystalFramework {
    let s = 3.0f64.sqrt();
    build(
        Basis2::new(Vector2::new(1.0, 0.0), Vector2::new(0.5, s / 2.0)).unwrap(),
        vec![
            Vector2::ZERO,
            Vector2::new(0.5, 0.0),
            Vector2::new(0.25, s / 4.0),
        ],
        vec![
            MotifEdge::new(0, 1, [0, 0]),
            MotifEdge::new(0, 2, [0, 0]),
            MotifEdge::new(1, 2, [0, 0]),
            MotifEdge::new(1, 0, [1, 0]),
            MotifEdge::new(2, 0, [0, 1]),
            MotifEdge::new(1, 2, [1, -1]),
        ],
    )
}

/// Isolated unit bars on a sparse lattice; every bar can spin on its own.
pub fn disjoint_bars() -> CrystalFramework {
    build(
        Basis2::new(Vector2::new(3.0, 0.0), Vector2::new(0.0, 3.0)).unwrap(),
        vec![Vector2::ZERO, Vector2::new(1.0, 0.0)],
        vec![MotifEdge::new(0, 1, [0, 0])],
    )
}

/// Joints with no bars at all.
pub fn free_joints() -> CrystalFramework {
    build(Basis2::standard(), vec![Vector2::ZERO], vec![])
}

/// Braced grid with a four-bar linkage pinned inside every cell. The two
/// extra joints and the two grid joints they attach to form a quadrilateral
/// whose mechanism stays inside the cell.
pub fn four_bar_ring() -> CrystalFramework {
    build(
        Basis2::standard(),
        vec![
            Vector2::ZERO,
            Vector2::new(0.25, 0.4),
            Vector2::new(0.75, 0.45),
        ],
        vec![
            MotifEdge::new(0, 0, [1, 0]),
            MotifEdge::new(0, 0, [0, 1]),
            MotifEdge::new(0, 0, [1, 1]),
            MotifEdge::new(0, 1, [0, 0]),
            MotifEdge::new(1, 2, [0, 0]),
            MotifEdge::new(2, 0, [1, 0]),
        ],
    )
}

/// A guess at a braced grid augmented by triangle chains: each cell hangs a
/// triangle `(0, 1, 2)` off its grid joint and consecutive triangles along
/// `a1` are linked by a bar. Not a reproduction of any published figure.
#[cfg(feature = "reconstructed-fixtures")]
pub fn triangle_augmented_grid() -> CrystalFramework {
    build(
        Basis2::standard(),
        vec![
            Vector2::ZERO,
            Vector2::new(0.3, 0.55),
            Vector2::new(0.7, 0.6),
        ],
        vec![
            MotifEdge::new(0, 0, [1, 0]),
            MotifEdge::new(0, 0, [0, 1]),
            MotifEdge::new(0, 0, [1, 1]),
            MotifEdge::new(0, 1, [0, 0]),
            MotifEdge::new(1, 2, [0, 0]),
            MotifEdge::new(0, 2, [0, 0]),
            MotifEdge::new(2, 1, [1, 0]),
        ],
    )
}

/// Every fixture, for property sweeps.
pub fn all_crystals() -> Vec<CrystalFramework> {
    vec![
        square_grid(),
        braced_grid(),
        kagome(),
        disjoint_bars(),
        free_joints(),
        four_bar_ring(),
    ]
}

/// Fixtures whose realizations are connected.
pub fn connected_crystals() -> Vec<CrystalFramework> {
    vec![square_grid(), braced_grid(), kagome(), four_bar_ring()]
}

/// Looks a fixture up by its CLI name.
pub fn by_name(name: &str) -> Option<CrystalFramework> {
    Some(match name {
        "square" | "square-grid" => square_grid(),
        "braced" | "braced-grid" => braced_grid(),
        "kagome" => kagome(),
        "disjoint-bars" => disjoint_bars(),
        "free-joints" => free_joints(),
        "four-bar-ring" => four_bar_ring(),
        #[cfg(feature = "reconstructed-fixtures")]
        "triangle-grid" => triangle_augmented_grid(),
        _ => return None,
    })
}

pub const NAMES: &[&str] = &[
    "square-grid",
    "braced-grid",
    "kagome",
    "disjoint-bars",
    "free-joints",
    "four-bar-ring",
];
