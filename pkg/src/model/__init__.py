# 模型模块
from src.model.encoder import Encoder, EncoderSpec, encode, encode_backward, init_encoder
from src.model.classifier import ClassifierHead, init_classifier
from src.model.serialization import load_model, save_model
