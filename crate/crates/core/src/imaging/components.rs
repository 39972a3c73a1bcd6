use super::BinaryMask;

/// Area, bounding box and centroid of one 8-connected component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentStats {
    pub area: usize,
    /// Inclusive `(min_x, min_y, max_x, max_y)`.
    pub bbox: (u32, u32, u32, u32),
    pub centroid: (f64, f64),
}

/// 8-connected components, largest first; ties broken by bbox `(min_y, min_x)`.
pub fn connected_components(mask: &BinaryMask) -> Vec<ComponentStats> {
    let w = mask.width() as usize;
    let h = mask.height() as usize;
    let bits = mask.bits();
    let mut visited = vec![false; w * h];
    let mut stack = Vec::new();
    let mut out = Vec::new();

    for start in 0..w * h {
        if !bits[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);

        let mut area = 0usize;
        let (mut sum_x, mut sum_y) = (0u64, 0u64);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);

        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            area += 1;
            sum_x += x as u64;
            sum_y += y as u64;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);

            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if bits[j] && !visited[j] {
                        visited[j] = true;
                        stack.push(j);
                    }
                }
            }
        }

        out.push(ComponentStats {
            area,
            bbox: (x0 as u32, y0 as u32, x1 as u32, y1 as u32),
            centroid: (sum_x as f64 / area as f64, sum_y as f64 / area as f64),
        });
    }

    out.sort_by(|a, b| {
        b.area
            .cmp(&a.area)
            .then(a.bbox.1.cmp(&b.bbox.1))
            .then(a.bbox.0.cmp(&b.bbox.0))
    });
    out
}
