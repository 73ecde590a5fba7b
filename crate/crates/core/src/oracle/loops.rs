use crate::error::{Error, Result};
use crate::graphs::{Kernel, Vertex};

/// Longest loop accepted by [`count_simple_loops`] is twice this.
pub const MAX_LOOP_HALF_LENGTH: u32 = 4;

/// Number of simple cycles of exactly `length` edges through `o`, each
/// cycle counted once regardless of direction.
pub fn count_simple_loops(kernel: &Kernel, o: &Vertex, length: u32) -> Result<u64> {
    if length > 2 * MAX_LOOP_HALF_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "loop length {length} exceeds the depth limit {}",
            2 * MAX_LOOP_HALF_LENGTH
        )));
    }
    kernel.validate(o)?;
    if length < 3 {
        return Ok(0);
    }
    let mut path = vec![o.clone()];
    let mut closed = 0u64;
    extend(kernel, o, &mut path, length as usize, &mut closed);
    // Each cycle is traversed once in each direction.
    Ok(closed / 2)
}

fn extend(kernel: &Kernel, o: &Vertex, path: &mut Vec<Vertex>, length: usize, closed: &mut u64) {
    let mut nbrs = Vec::new();
    kernel.push_neighbors(path.last().unwrap(), &mut nbrs);
    if path.len() == length {
        *closed += nbrs.iter().filter(|w| *w == o).count() as u64;
        return;
    }
    for w in nbrs {
        if !path.contains(&w) {
            path.push(w);
            extend(kernel, o, path, length, closed);
            path.pop();
        }
    }
}
