//! Zhang-Suen parallel thinning.
//!
//! Neighbours are numbered P2..P9 clockwise from north:
//!
//! ```text
//! P9 P2 P3
//! P8 P1 P4
//! P7 P6 P5
//! ```
//!
//! A contour pixel P1 is removed in a sub-iteration when 2 <= B(P1) <= 6,
//! A(P1) == 1 and the two product conditions of that sub-iteration hold
//! (first: P2*P4*P6 == 0 and P4*P6*P8 == 0; second: P2*P4*P8 == 0 and
//! P2*P6*P8 == 0). B counts contour neighbours; A counts 0 -> 1 transitions
//! in the cyclic sequence P2, P3, ..., P9, P2. Pixels outside the grid are
//! background.

use alloc::vec::Vec;

use crate::types::BinaryMask;

const OFFSETS: [(i64, i64); 8] = [(0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1)];

/// Deletion decision per 8-bit neighbourhood code (bit k set = P(k+2) set),
/// one table per sub-iteration.
const TABLES: [[bool; 256]; 2] = [build_table(0), build_table(1)];

const fn bit(code: usize, k: usize) -> bool {
    (code >> k) & 1 == 1
}

const fn build_table(step: usize) -> [bool; 256] {
    let mut table = [false; 256];
    let mut code = 0;
    while code < 256 {
        let b = (code as u8).count_ones();
        let mut a = 0;
        let mut k = 0;
        while k < 8 {
            if !bit(code, k) && bit(code, (k + 1) % 8) {
                a += 1;
            }
            k += 1;
        }
        // P2 = bit 0, P4 = bit 2, P6 = bit 4, P8 = bit 6
        let (p2, p4, p6, p8) = (bit(code, 0), bit(code, 2), bit(code, 4), bit(code, 6));
        let products = if step == 0 {
            !(p2 && p4 && p6) && !(p4 && p6 && p8)
        } else {
            !(p2 && p4 && p8) && !(p2 && p6 && p8)
        };
        table[code] = b >= 2 && b <= 6 && a == 1 && products;
        code += 1;
    }
    table
}

fn neighborhood(data: &[bool], w: usize, h: usize, x: usize, y: usize) -> usize {
    let mut code = 0;
    for (k, (dx, dy)) in OFFSETS.iter().enumerate() {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h && data[ny as usize * w + nx as usize] {
            code |= 1 << k;
        }
    }
    code
}

/// One sub-iteration (`second == false` for the first). Returns the number
/// of pixels removed.
pub fn thin_step(mask: &mut BinaryMask, second: bool) -> usize {
    let (w, h) = mask.dims();
    let table = &TABLES[usize::from(second)];
    let data = mask.data();
    let doomed: Vec<usize> = (0..w * h)
        .filter(|&i| data[i] && table[neighborhood(data, w, h, i % w, i / w)])
        .collect();
    for &i in &doomed {
        mask.set(mask.point_at(i), false).expect("index in range");
    }
    doomed.len()
}

/// Alternates both sub-iterations until a full pass removes nothing.
pub fn thin(mask: &BinaryMask) -> BinaryMask {
    let mut out = mask.clone();
    loop {
        let removed = thin_step(&mut out, false) + thin_step(&mut out, true);
        if removed == 0 {
            return out;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::PixelPoint;
    use alloc::vec;

    fn mask_from(rows: &[&str]) -> BinaryMask {
        let w = rows[0].len();
        let data = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        BinaryMask::new(w, rows.len(), data).unwrap()
    }

    #[test]
    fn thin_line_unchanged() {
        let m = mask_from(&["........", ".######.", "........"]);
        assert_eq!(thin(&m), m);
        let diag = mask_from(&["#...", ".#..", "..#.", "...#"]);
        assert_eq!(thin(&diag), diag);
    }

    #[test]
    fn empty_stays_empty() {
        let m = BinaryMask::filled(5, 4, false).unwrap();
        assert_eq!(thin(&m), m);
    }

    #[test]
    fn solid_block_shrinks() {
        let m = mask_from(&[".....", ".###.", ".###.", ".###.", "....."]);
        let t = thin(&m);
        assert_eq!(t.ones(), vec![PixelPoint::new(2, 2)]);
    }

    #[test]
    fn thick_bar_becomes_one_pixel_wide() {
        let m = mask_from(&[
            "..........",
            ".########.",
            ".########.",
            ".########.",
            "..........",
        ]);
        let t = thin(&m);
        assert!(t.count_ones() > 0);
        for x in 0..10 {
            let col = (0..5).filter(|&y| t.get(PixelPoint::new(x, y)).unwrap()).count();
            assert!(col <= 1, "column {x} has {col} pixels");
        }
    }

    #[test]
    fn table_spot_checks() {
        // isolated pixel (B = 0) and interior pixel (B = 8) are kept
        assert!(!TABLES[0][0]);
        assert!(!TABLES[0][0xFF]);
        // line end with one neighbour: B = 1, kept
        assert!(!TABLES[0][1 << 2]);
        // north-west corner of a block: E, SE, S set
        let nw_corner = (1 << 2) | (1 << 3) | (1 << 4);
        assert!(TABLES[0][nw_corner]);
    }
}
