use super::state::DatState;
use super::DatModel;
use crate::corpus::{LabelId, Sentence};
use crate::error::{Error, Result};
use crate::features::EmbeddingTable;
use crate::tagger::{Source, TokenRef};

/// Greedy walk from `start` until the chosen action keeps the current label
/// or the model's step budget is used up.
pub fn relabel_token(model: &DatModel, context: &[f64], start: LabelId) -> Result<LabelId> {
    let mut state = DatState::new(context, start, model.num_labels())?;
    for _ in 0..model.max_steps() {
        let action = model.select_action(&state)?;
        if action == state.label() {
            break;
        }
        state = state.with_label(action)?;
    }
    Ok(state.label())
}

/// Relabels each filtered token, starting from its base label.
pub fn relabel(
    model: &DatModel,
    sentences: &[Sentence],
    filtered: &[(TokenRef, LabelId)],
    features: &EmbeddingTable,
) -> Result<Vec<(TokenRef, LabelId)>> {
    filtered
        .iter()
        .map(|&(r, start)| {
            let sentence = sentences.get(r.sentence).ok_or(Error::IndexOutOfRange {
                index: r.sentence,
                len: sentences.len(),
            })?;
            let v = features.ngram_average(sentence, r.token, model.ngram())?;
            Ok((r, relabel_token(model, &v, start)?))
        })
        .collect()
}

/// Merges base labels for confident tokens with augmented-tagger labels for
/// filtered ones. `lengths` gives the token count of each sentence; the two
/// sets must cover every token exactly once.
pub fn combine_outputs(
    lengths: &[usize],
    confident: &[(TokenRef, LabelId)],
    relabeled: &[(TokenRef, LabelId)],
) -> Result<Vec<Vec<(LabelId, Source)>>> {
    let mut out: Vec<Vec<Option<(LabelId, Source)>>> =
        lengths.iter().map(|&n| vec![None; n]).collect();
    let tagged = confident
        .iter()
        .map(|x| (x, Source::Base))
        .chain(relabeled.iter().map(|x| (x, Source::Dat)));
    for (&(r, label), source) in tagged {
        let slot = out
            .get_mut(r.sentence)
            .and_then(|s| s.get_mut(r.token))
            .ok_or_else(|| Error::Partition(format!("token {}:{} out of range", r.sentence, r.token)))?;
        if slot.is_some() {
            return Err(Error::Partition(format!(
                "token {}:{} assigned twice",
                r.sentence, r.token
            )));
        }
        *slot = Some((label, source));
    }
    out.into_iter()
        .enumerate()
        .map(|(s, sentence)| {
            sentence
                .into_iter()
                .enumerate()
                .map(|(i, x)| x.ok_or_else(|| Error::Partition(format!("token {s}:{i} has no label"))))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::table_model;
    use super::*;

    #[test]
    fn fixed_point_keeps_base_labels() {
        // argmax at every state is the current label
        let m = table_model(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 2, 0.9);
        for l in 0..3 {
            assert_eq!(relabel_token(&m, &[0.3, -0.1], LabelId(l)).unwrap(), LabelId(l));
        }
    }

    #[test]
    fn prefers_b_from_a() {
        // label 0 = A, label 1 = B; B is preferred from both states
        let m = table_model(&[vec![0.1, 0.9], vec![0.2, 0.8]], 1, 0.9);
        assert_eq!(relabel_token(&m, &[0.0], LabelId(0)).unwrap(), LabelId(1));
    }

    #[test]
    fn budget_of_one_takes_a_single_step() {
        // 0 -> 1 -> 2 -> 2 without a budget
        let mut m = table_model(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]], 1, 0.9);
        assert_eq!(relabel_token(&m, &[0.0], LabelId(0)).unwrap(), LabelId(2));
        m.set_max_steps(1).unwrap();
        assert_eq!(relabel_token(&m, &[0.0], LabelId(0)).unwrap(), LabelId(1));
    }

    fn r(sentence: usize, token: usize) -> TokenRef {
        TokenRef { sentence, token }
    }

    #[test]
    fn combine_empty_and_full_filter() {
        let lengths = [2, 1];
        let base = vec![(r(0, 0), LabelId(1)), (r(0, 1), LabelId(0)), (r(1, 0), LabelId(2))];
        let out = combine_outputs(&lengths, &base, &[]).unwrap();
        assert_eq!(out[0], vec![(LabelId(1), Source::Base), (LabelId(0), Source::Base)]);
        let out = combine_outputs(&lengths, &[], &base).unwrap();
        assert!(out.iter().flatten().all(|x| x.1 == Source::Dat));
    }

    #[test]
    fn combine_mixed_ten_tokens() {
        let lengths = [4, 3, 3];
        let mut confident = Vec::new();
        let mut relabeled = Vec::new();
        let mut expected = Vec::new();
        let mut k = 0;
        for (s, &n) in lengths.iter().enumerate() {
            let mut row = Vec::new();
            for i in 0..n {
                if k % 3 == 1 {
                    relabeled.push((r(s, i), LabelId(7)));
                    row.push((LabelId(7), Source::Dat));
                } else {
                    confident.push((r(s, i), LabelId(k as u32)));
                    row.push((LabelId(k as u32), Source::Base));
                }
                k += 1;
            }
            expected.push(row);
        }
        assert_eq!(k, 10);
        assert_eq!(combine_outputs(&lengths, &confident, &relabeled).unwrap(), expected);
    }

    #[test]
    fn combine_rejects_overlap_and_gaps() {
        let lengths = [2];
        let a = vec![(r(0, 0), LabelId(0))];
        assert!(matches!(combine_outputs(&lengths, &a, &[]), Err(Error::Partition(_))));
        let b = vec![(r(0, 0), LabelId(0)), (r(0, 1), LabelId(0))];
        assert!(matches!(combine_outputs(&lengths, &b, &a), Err(Error::Partition(_))));
        let c = vec![(r(0, 5), LabelId(0))];
        assert!(matches!(combine_outputs(&lengths, &b, &c), Err(Error::Partition(_))));
    }
}
