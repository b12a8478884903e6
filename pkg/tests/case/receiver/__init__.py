from .message_case import *
