import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from partitions import (
    CoarseningMove,
    Partition,
    PartitionError,
    all_partitions,
    apply_move,
    coarsening_pairs,
    coarser_partitions,
    is_coarser,
    is_discard_coarsening,
    is_merge_coarsening,
    single_moves,
    xi_set,
)

FOUR_LABEL_PARTITIONS = sorted(all_partitions("ABCD"), key=str)


def _p(text: str) -> Partition:
    return Partition.parse(text)


class PartitionParseTest(unittest.TestCase):
    def test_canonical_form(self) -> None:
        self.assertEqual(_p("CB|A"), _p("A|BC"))
        self.assertEqual(str(_p("DC|BA|E")), "AB|CD|E")
        self.assertEqual(len(_p("A|B|C")), 3)

    def test_multi_character_labels(self) -> None:
        p = Partition.parse("AliceBob|Carol", labels=["Alice", "Bob", "Carol"])
        self.assertEqual(p.blocks, (("Alice", "Bob"), ("Carol",)))
        with self.assertRaises(PartitionError):
            Partition.parse("AliceX|Carol", labels=["Alice", "Bob", "Carol"])

    def test_rejects_malformed_text(self) -> None:
        for text in ["", "A||B", "AB|BC", " | "]:
            with self.subTest(text=text):
                with self.assertRaises(PartitionError):
                    Partition.parse(text)
        with self.assertRaises(PartitionError):
            Partition.parse("A|Z", labels=["A", "B"])


class CoarseningMoveTest(unittest.TestCase):
    def test_each_move_kind(self) -> None:
        p = _p("AB|C|D")
        self.assertEqual(apply_move(p, CoarseningMove("a", (1,))), _p("AB|D"))
        self.assertEqual(apply_move(p, CoarseningMove("b", (1, 2))), _p("AB|CD"))
        self.assertEqual(apply_move(p, CoarseningMove("c", (0,), "A")), _p("B|C|D"))

    def test_invalid_moves(self) -> None:
        with self.assertRaises(PartitionError):
            apply_move(_p("ABC"), CoarseningMove("a", (0,)))
        with self.assertRaises(PartitionError):
            apply_move(_p("A|B"), CoarseningMove("c", (0,), "A"))
        with self.assertRaises(PartitionError):
            apply_move(_p("A|B"), CoarseningMove("b", (0, 0)))
        with self.assertRaises(PartitionError):
            CoarseningMove("c", (0,))
        with self.assertRaises(PartitionError):
            CoarseningMove("d", (0,))

    def test_single_moves_by_kind(self) -> None:
        kinds = sorted(move.kind for move, _ in single_moves(_p("AB|C")))
        self.assertEqual(kinds, ["a", "a", "b", "c", "c"])


class CoarserOrderTest(unittest.TestCase):
    def test_reachability_with_witness(self) -> None:
        result = is_coarser(_p("A|B|C|D"), _p("AB|C"))
        self.assertTrue(result)
        self.assertEqual(len(result.moves), 2)
        self.assertEqual(result.path[0], _p("A|B|C|D"))
        self.assertEqual(len(result.describe()), 2)

    def test_unreachable_targets(self) -> None:
        self.assertFalse(is_coarser(_p("AB|C"), _p("A|B|C")))
        self.assertFalse(is_coarser(_p("A|B"), _p("A|C")))
        self.assertTrue(is_coarser(_p("A|B"), _p("A|B")))

    def test_discard_and_merge_predicates(self) -> None:
        self.assertTrue(is_discard_coarsening(_p("A|B|C"), _p("A|B")))
        self.assertFalse(is_discard_coarsening(_p("A|BC"), _p("A|B")))
        self.assertTrue(is_merge_coarsening(_p("A|B|C"), _p("A|BC")))
        self.assertFalse(is_merge_coarsening(_p("A|B|C"), _p("A|B|C")))
        self.assertFalse(is_merge_coarsening(_p("A|B|C"), _p("AB")))

    def test_all_partitions_count(self) -> None:
        self.assertEqual(len(all_partitions("ABC")), 14)
        with self.assertRaises(PartitionError):
            all_partitions("ABCD", max_parties=3)

    def test_coarsening_pairs_mark_party_drops(self) -> None:
        pairs = coarsening_pairs(("A", "B", "C"))
        closure = {(str(p), str(r)): needs_c for p, r, needs_c in pairs.closure}
        self.assertFalse(closure[("A|B|C", "A|BC")])
        self.assertTrue(closure[("AB|C", "A|C")])
        self.assertTrue(all(len(r) >= 2 for _, r, _ in pairs.steps))


class XiSetTest(unittest.TestCase):
    def test_discard_example(self) -> None:
        self.assertEqual({str(t) for t in xi_set(_p("A|B|C"), _p("A|B"))}, {"A|C", "B|C"})

    def test_merge_example(self) -> None:
        self.assertEqual({str(t) for t in xi_set(_p("A|B|C"), _p("A|BC"))}, {"B|C"})

    def test_five_party_discard_example(self) -> None:
        expected = {
            "A|C", "A|D", "A|E", "A|CD", "A|C|E", "A|D|E", "A|CD|E",
            "B|C", "B|D", "B|E", "B|CD", "B|C|E", "B|D|E", "B|CD|E",
            "C|E", "D|E", "CD|E",
        }
        got = {str(t) for t in xi_set(_p("A|B|CD|E"), _p("A|B"))}
        self.assertEqual(got, expected)
        self.assertEqual(len(got), 17)

    def test_requires_discard_or_merge(self) -> None:
        with self.assertRaises(PartitionError):
            xi_set(_p("AB|C"), _p("A|C"))


class CoarserPropertyTest(unittest.TestCase):
    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(FOUR_LABEL_PARTITIONS), st.data())
    def test_witness_replays_to_target(self, p: Partition, data: st.DataObject) -> None:
        reachable = sorted(coarser_partitions(p), key=str)
        r = data.draw(st.sampled_from(reachable))
        result = is_coarser(p, r)
        self.assertTrue(result)
        current = p
        for move in result.moves:
            current = apply_move(current, move)
        self.assertEqual(current, r)

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(FOUR_LABEL_PARTITIONS))
    def test_moves_never_add_parties_or_blocks(self, p: Partition) -> None:
        for _, r in single_moves(p):
            self.assertTrue(r.parties <= p.parties)
            self.assertLessEqual(len(r), len(p))


if __name__ == "__main__":
    unittest.main()
