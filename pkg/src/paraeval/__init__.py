"""paraeval: paraphrase-aware evaluation and data enrichment for
translation corpora.

Core surface: corpus/paraphrase file formats (`data`), the 13a tokenizer
and generation cleanup (`textnorm`), BLEU/ROUGE-L/edit-distance kernels
(`lexical`), greedy embedding matching and providers (`semantic`), the
combined paraphrase quality score (`parascore`), best-reference evaluation
(`bleu_para`), human-agreement analysis (`correlation`), and the LLM
generation pipeline (`generation`).
"""

from .bleu_para import (
    EvalReport,
    SelectionResult,
    bleu_para_corpus,
    eval_no_paraphrases,
    select_best_reference,
    sentence_bleu4,
)
from .correlation import CorrelationReport, correlate, extremes_subset, pearson, spearman
from .data import (
    DatasetError,
    EvalInstance,
    HumanRating,
    ParaphraseSet,
    TrainRecord,
    Utterance,
    VariantScore,
    build_trainset,
    load_corpus,
    load_instances,
    load_paraphrases,
    load_ratings,
    save_paraphrases,
)
from .generation import (
    ChatClient,
    ChatTransportError,
    GenerationConfig,
    OpenAIChatClient,
    PromptEnvelope,
    build_prompt,
    context_window,
    generate_set,
    run_generation,
)
from .lexical import (
    BleuBreakdown,
    RougeLScore,
    corpus_bleu,
    levenshtein,
    nld,
    rouge_l,
    sentence_bleu,
)
from .parascore import (
    DistributionSummary,
    ParaScoreConfig,
    combine,
    filter_threshold,
    parascore,
    score_set,
    summarize,
)
from .semantic import (
    BertScoreTriple,
    CachedProvider,
    EmbeddingMatrix,
    FileProvider,
    ProviderError,
    ProviderUnreachable,
    ServiceProvider,
    TextRejected,
    embed,
    greedy_bertscore,
)
from .textnorm import TokenSequence, normalize_generation, tokenize_13a, word_count

__version__ = "0.1.0"
