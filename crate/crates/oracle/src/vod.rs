use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Video {
    pub id: u16,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoStore {
    pub videos: Vec<Video>,
}

impl VideoStore {
    /// Length of the selection stream: the longest video.
    pub fn stream_len(&self) -> usize {
        self.videos.iter().map(|v| v.bytes.len()).max().unwrap_or(0)
    }
}

/// Bytes of the video with `id`, zero-padded to the stream length; all zeros if absent.
pub fn oracle_vod(store: &VideoStore, id: u16) -> Vec<u8> {
    let mut out = store
        .videos
        .iter()
        .find(|v| v.id == id)
        .map(|v| v.bytes.clone())
        .unwrap_or_default();
    out.resize(store.stream_len(), 0);
    out
}
