"""Hesitant alternating automata and the model-checking pipeline."""

from .boolean import FALSE, TRUE
from .build import Checker, FragmentError, Verdict, model_check, pipeline_alphabet
from .core import (BUCHI, COBUCHI, TRANSIENT, Budget, BudgetExceeded, Haa, MalformedAutomaton,
                   Nbw, OneLetterHaa, haa_dual, nbw_to_haa)
from .dealternation import haa_to_nbw, ltl_to_haa, ltl_to_nbw
from .games import haa_accepts, nbw_accepts, one_letter_nonempty, solve_game
