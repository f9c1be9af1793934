//! Semantic label grids, connected regions and cleanup.
//!
//! A [`LabelMap`] is a row-major grid of [`ClassId`] values. Regions are
//! connected components of a single class and carry both an explicit pixel
//! list and a bitmask over their bounding box.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MaskError;

/// Semantic class of a pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
#[serde(try_from = "u8", into = "u8")]
pub enum ClassId {
    Sea = 0,
    Oil = 1,
    LookAlike = 2,
    Ship = 3,
    Land = 4,
}

impl ClassId {
    pub const ALL: [ClassId; 5] = [
        ClassId::Sea,
        ClassId::Oil,
        ClassId::LookAlike,
        ClassId::Ship,
        ClassId::Land,
    ];
    pub const COUNT: usize = 5;

    pub fn from_u8(v: u8) -> Option<ClassId> {
        match v {
            0 => Some(ClassId::Sea),
            1 => Some(ClassId::Oil),
            2 => Some(ClassId::LookAlike),
            3 => Some(ClassId::Ship),
            4 => Some(ClassId::Land),
            _ => None,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::Sea => "sea",
            ClassId::Oil => "oil",
            ClassId::LookAlike => "look-alike",
            ClassId::Ship => "ship",
            ClassId::Land => "land",
        }
    }

    /// Display colour used for rendered masks.
    pub fn color(self) -> [u8; 3] {
        match self {
            ClassId::Sea => [0, 0, 0],
            ClassId::Oil => [0, 255, 255],
            ClassId::LookAlike => [255, 0, 0],
            ClassId::Ship => [153, 76, 0],
            ClassId::Land => [0, 153, 0],
        }
    }

    pub fn from_color(rgb: [u8; 3]) -> Option<ClassId> {
        ClassId::ALL.into_iter().find(|c| c.color() == rgb)
    }
}

impl TryFrom<u8> for ClassId {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        ClassId::from_u8(v).ok_or_else(|| format!("class id {v} is outside 0..=4"))
    }
}

impl From<ClassId> for u8 {
    fn from(c: ClassId) -> u8 {
        c as u8
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Pixel adjacency used for component analysis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(format!("connectivity must be 4 or 8, got {v}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (0, -1),
            (0, 1),
            (1, -1),
            (1, 0),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// Row-major grid of class ids.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    data: Vec<ClassId>,
}

impl fmt::Debug for LabelMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LabelMap {}x{}", self.width, self.height)?;
        if self.width * self.height <= 32 * 32 {
            for row in 0..self.height {
                for col in 0..self.width {
                    write!(f, "{}", self.get(row, col) as u8)?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

impl LabelMap {
    pub fn filled(width: usize, height: usize, class: ClassId) -> Self {
        assert!(
            width > 0 && height > 0,
            "label map dimensions must be positive"
        );
        LabelMap {
            width,
            height,
            data: vec![class; width * height],
        }
    }

    pub fn from_classes(
        width: usize,
        height: usize,
        data: Vec<ClassId>,
    ) -> Result<Self, MaskError> {
        if width == 0 || height == 0 {
            return Err(MaskError::InvalidLabelMap(
                "dimensions must be positive".into(),
            ));
        }
        if data.len() != width * height {
            return Err(MaskError::InvalidLabelMap(format!(
                "expected {} cells, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(LabelMap {
            width,
            height,
            data,
        })
    }

    /// Builds a map from raw bytes, each of which must be a valid class id.
    pub fn from_raw(width: usize, height: usize, raw: &[u8]) -> Result<Self, MaskError> {
        if raw.len() != width * height {
            return Err(MaskError::InvalidLabelMap(format!(
                "expected {} cells, got {}",
                width * height,
                raw.len()
            )));
        }
        let data = raw
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                ClassId::from_u8(v).ok_or(MaskError::UnknownPixelValue {
                    value: v as u32,
                    row: i / width.max(1),
                    col: i % width.max(1),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_classes(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> ClassId {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, class: ClassId) {
        self.data[row * self.width + col] = class;
    }

    /// Label at signed coordinates, `None` outside the grid.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> Option<ClassId> {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            None
        } else {
            Some(self.get(row as usize, col as usize))
        }
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.data
    }

    pub fn to_raw(&self) -> Vec<u8> {
        self.data.iter().map(|&c| c as u8).collect()
    }

    pub fn same_shape(&self, other: &LabelMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Class ids that occur at least once.
    pub fn present_classes(&self) -> Vec<ClassId> {
        let hist = class_histogram(self);
        ClassId::ALL
            .into_iter()
            .filter(|c| hist[c.index()] > 0)
            .collect()
    }
}

/// Axis-aligned inclusive bounding box in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl BBox {
    pub fn height(&self) -> usize {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> usize {
        self.max_col - self.min_col + 1
    }
}

/// One connected component of a single class.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    class: ClassId,
    pixels: Vec<(usize, usize)>,
    bbox: BBox,
    mask: Vec<bool>,
    centroid: (f64, f64),
}

impl Region {
    /// Builds a region from a pixel list. Duplicates are removed and the list
    /// is sorted row-major. Returns `None` for an empty list.
    pub fn from_pixels(class: ClassId, mut pixels: Vec<(usize, usize)>) -> Option<Region> {
        if pixels.is_empty() {
            return None;
        }
        pixels.sort_unstable();
        pixels.dedup();
        let mut bbox = BBox {
            min_row: usize::MAX,
            min_col: usize::MAX,
            max_row: 0,
            max_col: 0,
        };
        let (mut sr, mut sc) = (0.0f64, 0.0f64);
        for &(r, c) in &pixels {
            bbox.min_row = bbox.min_row.min(r);
            bbox.min_col = bbox.min_col.min(c);
            bbox.max_row = bbox.max_row.max(r);
            bbox.max_col = bbox.max_col.max(c);
            sr += r as f64;
            sc += c as f64;
        }
        let n = pixels.len() as f64;
        let mut mask = vec![false; bbox.width() * bbox.height()];
        for &(r, c) in &pixels {
            mask[(r - bbox.min_row) * bbox.width() + (c - bbox.min_col)] = true;
        }
        Some(Region {
            class,
            pixels,
            bbox,
            mask,
            centroid: (sr / n, sc / n),
        })
    }

    #[inline]
    pub fn class(&self) -> ClassId {
        self.class
    }

    /// Pixels as `(row, col)`, sorted row-major.
    #[inline]
    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// Mean pixel position as `(row, col)`.
    #[inline]
    pub fn centroid(&self) -> (f64, f64) {
        self.centroid
    }

    /// Bitmask over the bounding box, row-major.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn contains(&self, row: isize, col: isize) -> bool {
        if row < self.bbox.min_row as isize
            || col < self.bbox.min_col as isize
            || row > self.bbox.max_row as isize
            || col > self.bbox.max_col as isize
        {
            return false;
        }
        let r = row as usize - self.bbox.min_row;
        let c = col as usize - self.bbox.min_col;
        self.mask[r * self.bbox.width() + c]
    }

    pub fn with_class(mut self, class: ClassId) -> Region {
        self.class = class;
        self
    }
}

/// Extracts connected components of `class`, ordered by the top-left corner
/// of their bounding boxes.
pub fn connected_components(
    map: &LabelMap,
    class: ClassId,
    connectivity: Connectivity,
) -> Vec<Region> {
    let (w, h) = (map.width(), map.height());
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if seen[start] || map.data[start] != class {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(idx) = queue.pop_front() {
            let (r, c) = (idx / w, idx % w);
            pixels.push((r, c));
            for &(dr, dc) in connectivity.offsets() {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                    continue;
                }
                let nidx = nr as usize * w + nc as usize;
                if !seen[nidx] && map.data[nidx] == class {
                    seen[nidx] = true;
                    queue.push_back(nidx);
                }
            }
        }
        regions.extend(Region::from_pixels(class, pixels));
    }
    regions.sort_by_key(|r| (r.bbox.min_row, r.bbox.min_col, r.pixels[0]));
    regions
}

/// Pixel count per class, indexed by [`ClassId::index`].
pub fn class_histogram(map: &LabelMap) -> [u64; ClassId::COUNT] {
    let mut counts = [0u64; ClassId::COUNT];
    for &c in &map.data {
        counts[c.index()] += 1;
    }
    counts
}

/// Replaces every component of a class in `classes` with fewer than `min_px`
/// pixels by `fill`.
///
/// Panics if `fill` is one of `classes`.
pub fn remove_small(
    map: &LabelMap,
    min_px: usize,
    classes: &[ClassId],
    fill: ClassId,
    connectivity: Connectivity,
) -> LabelMap {
    assert!(
        !classes.contains(&fill),
        "fill class {fill} must not be one of the cleaned classes"
    );
    let mut out = map.clone();
    for &class in classes {
        for region in connected_components(map, class, connectivity) {
            if region.area() < min_px {
                for &(r, c) in region.pixels() {
                    out.set(r, c, fill);
                }
            }
        }
    }
    out
}
