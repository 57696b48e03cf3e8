//! Offline text source: a bigram chain over a small embedded snake-story corpus.
//!
//! Output is a pure function of `(seed, story, temperature, limit)`. Temperature
//! flattens the successor weights (`count^(1/T)`) and raises the chance of
//! jumping to an arbitrary corpus word, so hotter text is more varied.

use std::collections::HashMap;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::rng::DrawStream;

const CORPUS: &str = "\
Once upon a time a small green snake lived under a flat stone at the edge of the forest. \
Every morning the snake slid out to warm its scales in the sun and watch the birds. \
The forest was quiet and the snake liked the quiet, but one morning a strange sound rolled \
through the trees. The snake lifted its head and tasted the air. Something new had come to \
the forest. It followed the sound past the old oak, across the stream and up the hill where \
the grass grew tall. At the top of the hill the snake found a wooden house with an open door. \
Inside the house a boy was singing to a basket of eggs. The snake was hungry, but the song \
was kind and the snake stayed still to listen. The boy saw the snake and did not run. He \
smiled and set one egg on the floor. The snake ate the egg and the boy laughed. From that day \
the snake and the boy were friends. They explored the forest together, the boy walking and \
the snake riding on his shoulder. They found a hidden lake where silver fish jumped at dusk. \
They found a cave where old bones lay in the dark. One night a storm broke over the hill and \
the river rose. The house began to flood and the boy was trapped in the attic. The snake \
swam through the cold water, climbed the wall and pulled a rope to the window. The boy \
climbed down the rope and they escaped into the night. When the storm was over the forest \
was changed. Trees had fallen and the stream had a new path. The snake shed its old skin \
under the flat stone and felt strong again. The boy built a new house by the lake and the \
snake slept in the warm stones beside the door. Years passed and the snake grew long and \
wise. Travellers came to the lake to hear the story of the brave snake and the boy who \
sang to eggs. The snake listened from the stones and said nothing, but its eyes were bright. \
Sometimes at night the snake dreamed of the storm and the rope and the cold water. Then it \
would wake, taste the air and slide down to the lake to drink. The moon shone on the water \
and the fish jumped and the snake was happy in its quiet home.";

struct Chain {
    vocab: Vec<&'static str>,
    index: HashMap<&'static str, usize>,
    lower_index: HashMap<String, usize>,
    /// Successor word ids with counts, in first-seen order.
    successors: Vec<Vec<(usize, u32)>>,
    starters: Vec<usize>,
}

fn chain() -> &'static Chain {
    static CHAIN: OnceLock<Chain> = OnceLock::new();
    CHAIN.get_or_init(|| {
        let tokens: Vec<&'static str> = CORPUS.split_whitespace().collect();
        let mut vocab = Vec::new();
        let mut index = HashMap::new();
        let ids: Vec<usize> = tokens
            .iter()
            .map(|t| {
                *index.entry(*t).or_insert_with(|| {
                    vocab.push(*t);
                    vocab.len() - 1
                })
            })
            .collect();
        let mut successors: Vec<Vec<(usize, u32)>> = vec![Vec::new(); vocab.len()];
        for pair in ids.windows(2) {
            let list = &mut successors[pair[0]];
            match list.iter_mut().find(|(id, _)| *id == pair[1]) {
                Some((_, count)) => *count += 1,
                None => list.push((pair[1], 1)),
            }
        }
        let mut starters = vec![ids[0]];
        for i in 1..tokens.len() {
            if tokens[i - 1].ends_with('.') && !starters.contains(&ids[i]) {
                starters.push(ids[i]);
            }
        }
        let mut lower_index = HashMap::new();
        for (i, word) in vocab.iter().enumerate() {
            lower_index.entry(word.to_lowercase()).or_insert(i);
        }
        Chain { vocab, index, lower_index, successors, starters }
    })
}

fn stream_seed(seed: u64, story: &str, temperature: f64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(temperature.to_bits().to_le_bytes());
    hasher.update(story.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

fn jump_probability(temperature: f64) -> f64 {
    ((temperature - 0.4) * 0.35).clamp(0.0, 0.9)
}

/// Deterministic continuation of `story` with exactly `limit` words.
pub fn offline_generate(seed: u64, story: &str, temperature: f64, limit: usize) -> String {
    if limit == 0 {
        return String::new();
    }
    let chain = chain();
    let mut stream = DrawStream::new(stream_seed(seed, story, temperature));
    let temperature = temperature.max(0.05);
    let jump = jump_probability(temperature);

    let mut words: Vec<&str> = Vec::with_capacity(limit);
    let last = story.split_whitespace().last();
    let mut current = match last.and_then(|w| {
        chain
            .index
            .get(w)
            .or_else(|| chain.lower_index.get(&w.to_lowercase()))
            .copied()
    }) {
        Some(id) => id,
        None => {
            let id = chain.starters[stream.pick(chain.starters.len())];
            words.push(chain.vocab[id]);
            id
        }
    };

    while words.len() < limit {
        let successors = &chain.successors[current];
        let next = if successors.is_empty() || stream.unit() < jump {
            stream.pick(chain.vocab.len())
        } else {
            let weights: Vec<f64> = successors
                .iter()
                .map(|(_, count)| (*count as f64).powf(1.0 / temperature))
                .collect();
            let total: f64 = weights.iter().sum();
            let mut target = stream.unit() * total;
            let mut chosen = successors[successors.len() - 1].0;
            for ((id, _), w) in successors.iter().zip(&weights) {
                if target < *w {
                    chosen = *id;
                    break;
                }
                target -= w;
            }
            chosen
        };
        words.push(chain.vocab[next]);
        current = next;
    }
    words.join(" ")
}
