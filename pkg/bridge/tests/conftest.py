import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordPiece
from tokenizers.pre_tokenizers import Whitespace
from tokenizers.processors import TemplateProcessing
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

TINY_HIDDEN = 16
TINY_LAYERS = 4


def _tiny_tokenizer():
    chars = "abcdefghijklmnopqrstuvwxyz0123456789"
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + list(chars)
        + ["##" + c for c in chars]
    )
    vocab_map = {token: i for i, token in enumerate(vocab)}
    tokenizer = Tokenizer(WordPiece(vocab_map, unk_token="[UNK]"))
    tokenizer.pre_tokenizer = Whitespace()
    tokenizer.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab_map["[CLS]"]), ("[SEP]", vocab_map["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    ), len(vocab)


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized BERT saved locally, loadable offline."""
    model_dir = tmp_path_factory.mktemp("tinybert")
    tokenizer, vocab_size = _tiny_tokenizer()
    tokenizer.save_pretrained(model_dir)
    config = BertConfig(
        vocab_size=vocab_size,
        hidden_size=TINY_HIDDEN,
        num_hidden_layers=TINY_LAYERS,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=64,
    )
    torch.manual_seed(1234)
    BertModel(config).save_pretrained(model_dir)
    return model_dir
