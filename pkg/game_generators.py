"""
Game Generators
Builders for the reference scenarios, the prime-cycle family, the games produced
by the NFA emptiness and universality reductions, and seeded random games and
automata for the property suite.
"""

import itertools
import logging
from typing import List, Optional, Sequence

import numpy as np

from automata import NFA, WordAutomaton
from game_errors import PreconditionError
from game_graph import LOSE, GameBuilder, GameGraph, complete_game
from resource_limits import ResourceLimits, resolve

logger = logging.getLogger('GameGenerators')

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


def first_primes(m: int) -> List[int]:
    if m > len(PRIMES):
        raise PreconditionError(f"only the first {len(PRIMES)} primes are tabulated")
    return list(PRIMES[:m])


def gen_prime_family(m: int, limits: Optional[ResourceLimits] = None) -> GameGraph:
    """
    Two-player game without choices whose gaps of non-hierarchical rounds are
    governed by the first m primes.

    v0 enters one of m cycles C^r of length p_r, on which both players observe 0.
    From every cycle position except the last one, the play may leave to v01
    (player 1 observes 1, player 2 observes 0) or v10 (swapped), and then ends
    in the common sink v• observed as • by both. On the cycles, the information
    sets at round t are comparable exactly when every p_r divides t - 2 counted
    in positions, i.e. when every p_r divides the history length minus one.
    """
    limits = resolve(limits)
    if m < 1:
        raise PreconditionError("the prime family starts at m = 1")
    limits.check('max_prime_family', m, 'generating the prime family')
    primes = first_primes(m)

    builder = GameBuilder(2, [['-'], ['-']])
    builder.add_position('v0', ['-', '-'], 'ok')
    builder.add_position('v01', ['1', '0'], 'ok')
    builder.add_position('v10', ['0', '1'], 'ok')
    builder.add_position('v•', ['•', '•'], 'ok')
    for r, p in enumerate(primes):
        for step in range(p):
            builder.add_position(('c', r, step), ['0', '0'], 'ok')
    for r, p in enumerate(primes):
        builder.add_moves('v0', ('c', r, 0))
        for step in range(p):
            builder.add_moves(('c', r, step), ('c', r, (step + 1) % p))
            if step < p - 1:
                builder.add_moves(('c', r, step), 'v01')
                builder.add_moves(('c', r, step), 'v10')
    for exit_position in ('v01', 'v10', 'v•'):
        builder.add_moves(exit_position, 'v•')
    game = builder.build('v0')
    logger.info(f"🔧 Prime family G_{m} with cycles {primes}: {game.num_positions} positions")
    return game


def _require_nfa(automaton: WordAutomaton) -> None:
    if automaton.mode != NFA:
        raise PreconditionError(f"expected a finite-word NFA, got mode '{automaton.mode}'")


def gen_from_nfa_emptiness(automaton: WordAutomaton) -> GameGraph:
    """
    Game that yields hierarchical information iff the automaton accepts no word.

    Nature picks a run letter by letter; position (a, q) is reached by reading a
    into state q and both players observe a. Whenever the run is in an accepting
    state, Nature may instead send each player a private bit through one of the
    four positions (bit, x, y), after which the play ends in a public sink.
    """
    _require_nfa(automaton)
    builder = GameBuilder(2, [['-'], ['-']])
    builder.add_position('start', ['-', '-'], 'ok')
    builder.add_position('end', ['end', 'end'], 'ok')
    for x, y in itertools.product('01', repeat=2):
        builder.add_position(('bit', x, y), [x, y], 'ok')
        builder.add_moves(('bit', x, y), 'end')
    builder.add_moves('end', 'end')
    if automaton.initial is None:
        builder.add_moves('start', 'end')
        return builder.build('start')

    def label(letter, state):
        return (str(letter), automaton.label(state))

    def outgoing(source, state: int) -> None:
        moved = False
        for k, letter in enumerate(automaton.alphabet):
            for target in sorted(automaton.delta[state][k]):
                node = label(letter, target)
                if node not in builder:
                    builder.add_position(node, [str(letter), str(letter)], 'ok')
                    pending.append((node, target))
                builder.add_moves(source, node)
                moved = True
        if state in automaton.accepting:
            for x, y in itertools.product('01', repeat=2):
                builder.add_moves(source, ('bit', x, y))
            moved = True
        if not moved:
            builder.add_moves(source, 'end')

    pending = []
    outgoing('start', automaton.initial)
    while pending:
        node, state = pending.pop(0)
        outgoing(node, state)
    return builder.build('start')


def gen_from_nfa_universality(automaton: WordAutomaton) -> GameGraph:
    """
    Two-player game without choices built from an NFA over Σ.

    Observations range over Σ × {0, 1}. Position (a, q) is observed as (a, 0)
    by both players. For every letter a there are two fresh positions v_a and
    v′_a with β^1(v_a) = β^2(v′_a) = (a, 1) and β^1(v′_a) = β^2(v_a) = (a, 0);
    they are reachable from every position that has a move to some (a, q) with
    q accepting, and both lead to a common terminal position.
    """
    _require_nfa(automaton)
    builder = GameBuilder(2, [['-'], ['-']])
    builder.add_position('q0', ['-', '-'], 'ok')
    builder.add_position('over', ['over', 'over'], 'ok')
    builder.add_moves('over', 'over')
    for letter in automaton.alphabet:
        a = str(letter)
        builder.add_position(('v', a), [(a, 1), (a, 0)], 'ok')
        builder.add_position(('v′', a), [(a, 0), (a, 1)], 'ok')
        builder.add_moves(('v', a), 'over')
        builder.add_moves(('v′', a), 'over')
    if automaton.initial is None:
        builder.add_moves('q0', 'over')
        return builder.build('q0')

    pending = [('q0', automaton.initial)]
    seen = set()
    while pending:
        source, state = pending.pop(0)
        moved = False
        for k, letter in enumerate(automaton.alphabet):
            a = str(letter)
            for target in sorted(automaton.delta[state][k]):
                node = (a, automaton.label(target))
                if node not in builder:
                    builder.add_position(node, [(a, 0), (a, 0)], 'ok')
                if node not in seen:
                    seen.add(node)
                    pending.append((node, target))
                builder.add_moves(source, node)
                moved = True
                if target in automaton.accepting:
                    builder.add_moves(source, ('v', a))
                    builder.add_moves(source, ('v′', a))
        if not moved:
            builder.add_moves(source, 'over')
    return builder.build('q0')


def solo_game() -> GameGraph:
    builder = GameBuilder(1, [['a']])
    builder.add_position('v0', ['-'], 'ok')
    builder.add_moves('v0', 'v0')
    return builder.build('v0')


def pubcoin_game() -> GameGraph:
    """A public coin: both players see heads or tails, then the play returns to v0."""
    builder = GameBuilder(2, [['a', 'b'], ['a', 'b']])
    builder.add_position('v0', ['-', '-'], 'ok')
    for side in ('h', 't'):
        builder.add_position(side, [side, side], 'ok')
        builder.add_moves('v0', side)
        builder.add_moves(side, 'v0')
    return builder.build('v0')


def privbit_game() -> GameGraph:
    """Nature picks a bit that only player 1 observes; both branches are absorbing."""
    builder = GameBuilder(2, [['-'], ['-']])
    builder.add_position('v0', ['-', '-'], 'ok')
    builder.add_position('v1', ['0', '∘'], 'ok')
    builder.add_position('v2', ['1', '∘'], 'ok')
    for branch in ('v1', 'v2'):
        builder.add_moves('v0', branch)
        builder.add_moves(branch, branch)
    return builder.build('v0')


def privbit_echo_game() -> GameGraph:
    """
    Player 1 must echo the bit only it observes while player 2 plays c.

    Any other reply leads to the public position lose, colored LOSE.
    """
    builder = GameBuilder(2, [['0', '1'], ['c', 'd']])
    builder.add_position('v0', ['-', '-'], 'ok')
    builder.add_position('win', ['win', 'win'], 'ok')
    builder.add_position('lose', ['lose', 'lose'], LOSE)
    for bit in '01':
        branch = f'v{int(bit) + 1}'
        builder.add_position(branch, [bit, '∘'], 'ok')
        builder.add_moves('v0', branch)
        for x, y in itertools.product(range(2), repeat=2):
            correct = str(x) == bit and y == 0
            builder.add_move(branch, (x, y), 'win' if correct else 'lose')
    builder.add_moves('win', 'v0')
    builder.add_moves('lose', 'v0')
    return builder.build('v0')


def fork2_game() -> GameGraph:
    """
    Nature sends each player a private bit (b to player 1, c to player 2).

    Player 1 must then play c and player 2 must play b; the outcome is revealed
    publicly and the play returns to v0.
    """
    builder = GameBuilder(2, [['0', '1'], ['0', '1']])
    builder.add_position('v0', ['-', '-'], 'ok')
    for b, c in itertools.product('01', repeat=2):
        fork = f'f{b}{c}'
        builder.add_position(fork, [b, c], 'ok')
        builder.add_position(f'ok{b}{c}', [f'ok:{b}{c}'] * 2, 'ok')
        builder.add_position(f'bad{b}{c}', [f'bad:{b}{c}'] * 2, LOSE)
        builder.add_moves('v0', fork)
        for x, y in itertools.product(range(2), repeat=2):
            matched = str(x) == c and str(y) == b
            builder.add_move(fork, (x, y), f'ok{b}{c}' if matched else f'bad{b}{c}')
        builder.add_moves(f'ok{b}{c}', 'v0')
        builder.add_moves(f'bad{b}{c}', 'v0')
    return builder.build('v0')


def permanent_fork_game() -> GameGraph:
    """fork2 with absorbing fork positions that keep repeating the private bits."""
    builder = GameBuilder(2, [['-'], ['-']])
    builder.add_position('v0', ['-', '-'], 'ok')
    for b, c in itertools.product('01', repeat=2):
        fork = f'f{b}{c}'
        builder.add_position(fork, [b, c], 'ok')
        builder.add_moves('v0', fork)
        builder.add_moves(fork, fork)
    return builder.build('v0')


def swap_game() -> GameGraph:
    """
    Player 1 learns the first branch; one round later player 2 learns the
    exact position while player 1 does not.

    Information is comparable at every history but the order flips between
    rounds 1 and 2, so no static order exists.
    """
    builder = GameBuilder(2, [['-'], ['-']])
    builder.add_position('v0', ['-', '-'], 'ok')
    builder.add_position('v1', ['l', '∘'], 'ok')
    builder.add_position('v2', ['r', '∘'], 'ok')
    builder.add_position('end', ['end', 'end'], 'ok')
    for branch, leaves in (('v1', ('v3', 'v5')), ('v2', ('v4', 'v6'))):
        builder.add_moves('v0', branch)
        for leaf in leaves:
            builder.add_position(leaf, ['∘', leaf], 'ok')
            builder.add_moves(branch, leaf)
            builder.add_moves(leaf, 'end')
    builder.add_moves('end', 'end')
    return builder.build('v0')


def fork_choice_game(forced: bool = False) -> GameGraph:
    """
    Player 1 chooses between a calm public round and a round in which Nature
    forks private bits to both players; the fork always resolves publicly.

    With forced=True the calm round is colored LOSE, so winning requires forking.
    """
    builder = GameBuilder(2, [['calm', 'fork'], ['-']])
    builder.add_position('v0', ['-', '-'], 'ok')
    builder.add_position('calm', ['calm', 'calm'], LOSE if forced else 'ok')
    builder.add_position('join', ['join', 'join'], 'ok')
    builder.add_move('v0', (0, 0), 'calm')
    builder.add_moves('calm', 'v0')
    for b, c in itertools.product('01', repeat=2):
        fork = f'f{b}{c}'
        builder.add_position(fork, [b, c], 'ok')
        builder.add_move('v0', (1, 0), fork)
        builder.add_moves(fork, 'join')
    builder.add_moves('join', 'v0')
    return builder.build('v0')


SCENARIOS = {
    'solo': solo_game,
    'pubcoin': pubcoin_game,
    'privbit': privbit_game,
    'privbit_echo': privbit_echo_game,
    'fork2': fork2_game,
    'permanent_fork': permanent_fork_game,
    'swap': swap_game,
    'fork_choice': fork_choice_game,
    'fork_forced': lambda: fork_choice_game(forced=True),
}


def random_game(rng: np.random.Generator, players: int = 2, positions: int = 4, actions: int = 2,
                observations: int = 2, max_successors: int = 2, colors: Sequence[str] = ('ok',)) -> GameGraph:
    """
    Random game with the given dimensions; every (position, profile) pair gets
    between one and max_successors targets, so the result has no dead ends.

    Args:
        rng (np.random.Generator): Seeded generator, e.g. np.random.default_rng(7)
    """
    builder = GameBuilder(players, [[f'a{k}' for k in range(actions)] for _ in range(players)])
    for v in range(positions):
        obs = [f'b{int(rng.integers(observations))}' for _ in range(players)]
        builder.add_position(f'v{v}', obs, colors[int(rng.integers(len(colors)))])
    for v in range(positions):
        for profile in itertools.product(range(actions), repeat=players):
            count = int(rng.integers(1, max_successors + 1))
            for w in rng.choice(positions, size=count, replace=False):
                builder.add_move(f'v{v}', profile, f'v{int(w)}')
    return complete_game(builder.build('v0'))


def random_nfa(rng: np.random.Generator, states: int = 4, alphabet: Sequence[str] = ('a', 'b'),
               density: float = 0.3, accepting_rate: float = 0.25) -> WordAutomaton:
    """Random NFA with states q0..q{n-1}, initial q0."""
    rows = []
    for _ in range(states):
        row = []
        for _ in alphabet:
            row.append(frozenset(int(q) for q in np.flatnonzero(rng.random(states) < density)))
        rows.append(tuple(row))
    accepting = frozenset(int(q) for q in np.flatnonzero(rng.random(states) < accepting_rate))
    return WordAutomaton(mode=NFA, alphabet=tuple(alphabet), delta=tuple(rows), initial=0,
                         accepting=accepting, labels=tuple(f'q{q}' for q in range(states)))
