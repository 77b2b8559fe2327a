//! `gpflow align`: quotient distances between two stored fields.

use std::path::Path;

use crate::error::CliError;
use gpflow::grid::load_field;
use gpflow::quotient::{align_phase, AlignNorm};

pub fn run(a: &Path, b: &Path) -> Result<(), CliError> {
    let u = load_field(a)?;
    let v = load_field(b)?;
    if u.grid() != v.grid() {
        return Err(CliError::Config(format!(
            "fields live on different grids: {} is {}x{}, {} is {}x{}",
            a.display(),
            u.grid().nx(),
            u.grid().ny(),
            b.display(),
            v.grid().nx(),
            v.grid().ny()
        )));
    }
    let l2 = align_phase(&u, &v, AlignNorm::L2);
    let h01 = align_phase(&u, &v, AlignNorm::H01);
    println!("rho1 = {:.17e}  (omega* = {:+.12})", l2.rho, l2.omega_star);
    println!("rho2 = {:.17e}  (omega* = {:+.12})", h01.rho, h01.omega_star);
    Ok(())
}
