import codecs
import re

import pyparsing as pp

from ..errors import InputError

__all__ = [
    'Tokens',
    'parse_config', 'parse_config_value', 'parse_config_file',
]


class Tokens(object):
    # scalars
    delim_chars = '[],'
    pause = pp.FollowedBy(pp.Word(delim_chars) | pp.StringEnd())
    number = (pp.pyparsing_common.number + pause)
    quoted_string = pp.QuotedString('"', escChar='\\')
    true = (pp.Regex(r'(True|true|yes|on)') + pause). \
        setParseAction(lambda _: True)
    false = (pp.Regex(r'(False|false|no|off)') + pause). \
        setParseAction(lambda _: False)
    none = (pp.Regex(r'(None|none|null)') + pause). \
        setParseAction(lambda _: [None])
    unquoted_string = pp.CharsNotIn(delim_chars). \
        setParseAction(lambda toks: toks[0].strip())
    empty_value = pp.Empty(). \
        setParseAction(lambda _: '')

    # number lists like ``[-0.5, -0.25, 0]``, e.g. Chebyshev roots
    comma = pp.Literal(',').suppress()
    number_list = (
        pp.Literal('[').suppress() +
        pp.Optional(number + pp.ZeroOrMore(comma + number)) +
        pp.Literal(']').suppress()
    ).setParseAction(lambda toks: [tuple(toks)])

    # key-value pairs
    identifier = pp.pyparsing_common.identifier.copy()
    assign = pp.Literal('=').suppress()
    config_value = (
        number | true | false | none | number_list | quoted_string |
        unquoted_string | empty_value)
    key_value_pair = (identifier + assign + config_value). \
        setParseAction(lambda toks: (toks[0], toks[1]))
    key_value_pair_list = pp.Optional(
        key_value_pair + pp.ZeroOrMore(comma + key_value_pair))


def parse_config(config_text):
    """
    Parse configuration text like ``s=2,cheb_roots=[-0.5,0]`` into dict
    ``{'s': 2, 'cheb_roots': (-0.5, 0)}``.

    Args:
        config_text (str): The text to be parsed.

    Returns:
        dict[str, any]: The parsed configuration dict.

    Raises:
        InputError: If the text has syntax error.
    """
    t = Tokens.key_value_pair_list
    try:
        return dict(t.parseString(config_text, parseAll=True).asList())
    except pp.ParseException as ex:
        raise InputError('Syntax error in config {!r}: {}'.
                         format(config_text, ex))


def parse_config_value(text):
    """Type a single config value: number, list, boolean, none or string."""
    t = Tokens.config_value
    return t.parseString(text, parseAll=True).asList()[0]


_KV_PATTERN = re.compile(r'^\s*([^=]+?)\s*=\s*(.*?)\s*$')


def parse_config_file(path):
    """
    Parse configuration values from a plain-text file.

    Each non-empty line holds one ``key = value`` pair; lines starting
    with "#" are comments.  Values are typed like :func:`parse_config`,
    and may therefore contain commas only when quoted or bracketed.

    Args:
        path (str): Path of the file.

    Returns:
        dict[str, any]: The parsed configuration dict.

    Raises:
        InputError: If a line has syntax error.
    """
    ret = {}
    with codecs.open(path, 'rb', 'utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            m = _KV_PATTERN.match(line)
            try:
                if not m:
                    raise ValueError('expected "key = value"')
                name, value = m.groups()
                Tokens.identifier.parseString(name, parseAll=True)
                ret[name] = parse_config_value(value)
            except (ValueError, pp.ParseException) as ex:
                raise InputError('{}:{}: syntax error in config line {!r}: '
                                 '{}'.format(path, lineno, line, ex))
    return ret
