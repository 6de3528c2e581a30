use crate::image::{ChannelPlane, LEVELS};

/// Per-intensity pixel counts of one channel, bin width 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram {
    bins: [u64; LEVELS],
    total: u64,
}

impl Histogram {
    pub fn from_bins(bins: [u64; LEVELS]) -> Self {
        let total = bins.iter().sum();
        Self { bins, total }
    }

    pub fn of(plane: &ChannelPlane) -> Self {
        histogram(plane)
    }

    pub fn bins(&self) -> &[u64; LEVELS] {
        &self.bins
    }

    #[inline]
    pub fn count(&self, z: u8) -> u64 {
        self.bins[z as usize]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty_bin(&self, z: u8) -> bool {
        self.bins[z as usize] == 0
    }

    pub fn non_empty(&self) -> impl Iterator<Item = u8> + '_ {
        (0..LEVELS).filter(|&z| self.bins[z] != 0).map(|z| z as u8)
    }

    pub fn cumulate(&self) -> CumHistogram {
        cumulate(self)
    }
}

/// Running sums of a [`Histogram`]: `cum[z]` counts pixels with intensity `<= z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumHistogram {
    cum: [u64; LEVELS],
}

impl CumHistogram {
    pub fn values(&self) -> &[u64; LEVELS] {
        &self.cum
    }

    /// Cumulative count at `z`, with the convention that index -1 is 0.
    #[inline]
    pub fn at(&self, z: isize) -> u64 {
        if z < 0 {
            0
        } else {
            self.cum[z as usize]
        }
    }

    pub fn total(&self) -> u64 {
        self.cum[LEVELS - 1]
    }
}

pub fn histogram(plane: &ChannelPlane) -> Histogram {
    // four interleaved counters break the store-to-load dependency on runs of equal values
    let mut lanes = [[0u64; LEVELS]; 4];
    let data = plane.data();
    let mut chunks = data.chunks_exact(4);
    for c in &mut chunks {
        lanes[0][c[0] as usize] += 1;
        lanes[1][c[1] as usize] += 1;
        lanes[2][c[2] as usize] += 1;
        lanes[3][c[3] as usize] += 1;
    }
    for &v in chunks.remainder() {
        lanes[0][v as usize] += 1;
    }
    let mut bins = [0u64; LEVELS];
    for (z, b) in bins.iter_mut().enumerate() {
        *b = lanes[0][z] + lanes[1][z] + lanes[2][z] + lanes[3][z];
    }
    Histogram { bins, total: data.len() as u64 }
}

pub fn cumulate(h: &Histogram) -> CumHistogram {
    let mut cum = [0u64; LEVELS];
    let mut acc = 0;
    for (c, &b) in cum.iter_mut().zip(h.bins.iter()) {
        acc += b;
        *c = acc;
    }
    CumHistogram { cum }
}
