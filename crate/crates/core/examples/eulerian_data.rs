//! Rest-frame Eulerian data (metric, extrinsic curvature, pressure) converted
//! to the frame variables, checked against the constraints and saved as a
//! snapshot that `cby run` can restart from.

use cby::cli_io::{read_any, write_eulerian, Snapshot};
use cby::initial_data::{from_rest_eulerian, perturbed_flrw_eulerian};
use cby::monitor::{residual_report, RESIDUAL_NAMES};
use cby::Eos;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in [8, 16, 32] {
        let data = perturbed_flrw_eulerian(n, 1.0, 3.0, Eos::radiation(), 1e-3)?;
        let state = from_rest_eulerian(&data, 4)?;
        let rep = residual_report(&state, 4)?;
        print!("n = {n:2}:");
        for (name, norms) in RESIDUAL_NAMES.iter().zip(&rep.norms) {
            if norms.linf > 0.0 {
                print!("  {name} {:.2e}", norms.linf);
            }
        }
        println!();
    }

    let data = perturbed_flrw_eulerian(8, 1.0, 3.0, Eos::radiation(), 1e-2)?;
    let path = std::env::temp_dir().join("cby_eulerian_example.bin");
    write_eulerian(&data, &path)?;
    match read_any(&path)? {
        Snapshot::Eulerian(back) => println!("snapshot {} round-trips: {}", path.display(), back == data),
        Snapshot::State(_) => unreachable!(),
    }
    std::fs::remove_file(&path)?;
    Ok(())
}
