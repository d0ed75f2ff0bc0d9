/// Deterministic text-to-id mapping with four reserved specials.
pub trait Tokenizer: Send + Sync {
    fn vocab_size(&self) -> usize;
    fn bos(&self) -> u32;
    fn eos(&self) -> u32;
    fn pad(&self) -> u32;
    fn unk(&self) -> u32;
    fn encode(&self, text: &str) -> Vec<u32>;
    /// Special ids are skipped.
    fn decode(&self, ids: &[u32]) -> String;

    fn is_special(&self, id: u32) -> bool {
        id == self.bos() || id == self.eos() || id == self.pad() || id == self.unk()
    }
}

/// One token per byte; ids 0..=255 are the bytes themselves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ByteTokenizer;

impl ByteTokenizer {
    pub const BOS: u32 = 256;
    pub const EOS: u32 = 257;
    pub const PAD: u32 = 258;
    pub const UNK: u32 = 259;
    pub const VOCAB_SIZE: usize = 260;

    pub fn encode_bytes(&self, bytes: &[u8]) -> Vec<u32> {
        bytes.iter().map(|&b| b as u32).collect()
    }

    pub fn decode_bytes(&self, ids: &[u32]) -> Vec<u8> {
        ids.iter().filter(|&&id| id < 256).map(|&id| id as u8).collect()
    }
}

impl Tokenizer for ByteTokenizer {
    fn vocab_size(&self) -> usize {
        Self::VOCAB_SIZE
    }
    fn bos(&self) -> u32 {
        Self::BOS
    }
    fn eos(&self) -> u32 {
        Self::EOS
    }
    fn pad(&self) -> u32 {
        Self::PAD
    }
    fn unk(&self) -> u32 {
        Self::UNK
    }
    fn encode(&self, text: &str) -> Vec<u32> {
        self.encode_bytes(text.as_bytes())
    }
    fn decode(&self, ids: &[u32]) -> String {
        String::from_utf8_lossy(&self.decode_bytes(ids)).into_owned()
    }
}
