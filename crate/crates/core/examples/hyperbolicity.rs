//! The principal time blocks of a tilted frame: their spectrum is
//! `1` and `1 +- |B|`, and the system stays hyperbolic while `|B| < 1`.

use cby::frame_state::algebra::FrameGeometry;
use cby::initial_data::tilted_flat_data;
use cby::system::blocks::block_from_geometry;
use cby::system::{fosh_check, BlockId};
use nalgebra::{Matrix3, SymmetricEigen, Vector3};

fn main() -> cby::Result<()> {
    for tilt in [0.0, 0.3, 0.6, 0.9, 0.99, 1.2] {
        let report = fosh_check(&tilted_flat_data(6, 1.0, [tilt, 0.0, 0.0]));
        println!("|b| = {tilt:<5} {}", report.summary());
    }
    let geo = FrameGeometry::new(&Matrix3::identity(), &Vector3::new(0.0, 0.36, 0.48))?;
    for id in [BlockId::Ricci, BlockId::RiemannPair] {
        let block = block_from_geometry(&geo, 1.0, id);
        let mut ev: Vec<f64> = SymmetricEigen::new(block.m0.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        println!("{id:?} block at |B| = 0.6: {ev:.4?}");
    }
    Ok(())
}
