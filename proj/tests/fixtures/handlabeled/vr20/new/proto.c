int parse_header(const char *buf, size_t len, struct hdr *out)
{
	size_t off = 0;
	int ver;

	if (len < 1)
		return -EINVAL;
	ver = buf[off];
	off++;
	out->version = ver;
	if (len - off > NAME_MAX)
		return -EINVAL;
	memcpy(out->name, buf + off, len - off);
	return 0;
}

static int copy_items(struct item *dst, const struct item *src, int n)
{
	int k;

	if (n < 0)
		return -EINVAL;
	for (k = 0; k < n; k++)
		dst[k] = src[k];
	return n;
}

void release(struct ctx *ctx)
{
	mutex_lock(&ctx->lock);
	kfree(ctx->buf);
	ctx->buf = NULL;
	ctx->state = STATE_DEAD;
	mutex_unlock(&ctx->lock);
	notify(ctx);
}

int sum(const int *v, int n)
{
	long s = 0;
	for (int j = 0; j < n; j++)
		s += v[j];
	if (s > INT_MAX)
		return INT_MAX;
	return (int)s;
}
