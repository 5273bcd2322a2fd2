use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::SystemTime;

use thresh_core::GrayImage;

#[derive(Debug)]
pub struct StoredImage {
    pub id: String,
    pub image: GrayImage,
    pub created_at: SystemTime,
}

struct Slot {
    image: Arc<StoredImage>,
    last_used: AtomicU64,
}

/// In-memory image map with least-recently-used eviction.
///
/// Lookups take the read lock and bump an atomic recency stamp, so only
/// inserts serialize with other requests.
pub struct ImageStore {
    slots: RwLock<HashMap<String, Slot>>,
    clock: AtomicU64,
    capacity: usize,
}

impl ImageStore {
    pub fn new(capacity: usize) -> Self {
        ImageStore {
            slots: RwLock::new(HashMap::new()),
            clock: AtomicU64::new(0),
            capacity: capacity.max(1),
        }
    }

    fn tick(&self) -> u64 {
        self.clock.fetch_add(1, Ordering::Relaxed)
    }

    pub fn insert(&self, image: GrayImage) -> Arc<StoredImage> {
        let stored = Arc::new(StoredImage {
            id: uuid::Uuid::new_v4().simple().to_string(),
            image,
            created_at: SystemTime::now(),
        });
        let mut slots = self.slots.write().expect("store lock poisoned");
        while slots.len() >= self.capacity {
            let oldest = slots
                .iter()
                .min_by_key(|(_, s)| s.last_used.load(Ordering::Relaxed))
                .map(|(k, _)| k.clone());
            match oldest {
                Some(k) => {
                    slots.remove(&k);
                }
                None => break,
            }
        }
        slots.insert(
            stored.id.clone(),
            Slot {
                image: stored.clone(),
                last_used: AtomicU64::new(self.tick()),
            },
        );
        stored
    }

    pub fn get(&self, id: &str) -> Option<Arc<StoredImage>> {
        let slots = self.slots.read().expect("store lock poisoned");
        let slot = slots.get(id)?;
        slot.last_used.store(self.tick(), Ordering::Relaxed);
        Some(slot.image.clone())
    }

    pub fn len(&self) -> usize {
        self.slots.read().expect("store lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
