from src.models.core import DocumentId, Query, RankedList, TrueRanking, true_ranking
from src.models.plan import FlipPlan, PairAssignment, PerturbedList, PreferenceVote, RelevanceVote
from src.models.click_model import ClickModelSpec, LinearAttraction, PairContext, ScoreReport
from src.models.pair_stats import ConvergenceParams, PairStats, RelevanceTally, SufficiencyReport
from src.models.click_log import ClickLogRecord
from src.models.report import ReportRow, ReportTable
from src.models.ranking import ErrorCount, MinimizerComparison, PairMargin

__all__ = [
    'DocumentId', 'Query', 'RankedList', 'TrueRanking', 'true_ranking',
    'FlipPlan', 'PairAssignment', 'PerturbedList', 'PreferenceVote', 'RelevanceVote',
    'ClickModelSpec', 'LinearAttraction', 'PairContext', 'ScoreReport',
    'ConvergenceParams', 'PairStats', 'RelevanceTally', 'SufficiencyReport',
    'ClickLogRecord',
    'ReportRow', 'ReportTable',
    'ErrorCount', 'MinimizerComparison', 'PairMargin',
]
