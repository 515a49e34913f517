//! Ideal triangulations of marked surfaces, their quivers with potential, the
//! Ginzburg and cyclic A-infinity algebras built from them, and WKB
//! triangulations of meromorphic quadratic differentials on the sphere.
//!
//! The guide in `book/` walks through each module.

pub mod ainfty;
pub mod floer;
pub mod ginzburg;
pub mod linalg;
pub mod novikov;
pub mod quiver;
pub mod surface;
pub mod wkb;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/novikov.md")]
    mod novikov {}
    #[doc = include_str!("../../../book/src/quivers.md")]
    mod quivers {}
    #[doc = include_str!("../../../book/src/ginzburg.md")]
    mod ginzburg {}
    #[doc = include_str!("../../../book/src/ainfty.md")]
    mod ainfty {}
    #[doc = include_str!("../../../book/src/wkb.md")]
    mod wkb {}
    #[doc = include_str!("../../../book/src/floer.md")]
    mod floer {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
