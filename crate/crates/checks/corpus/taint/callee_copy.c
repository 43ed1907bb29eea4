int copy(char dst[], char src[], int len) {
    memcpy(dst, src, len); // sink:a
    return len;
}

int main(int fd) {
    char in[64];
    char out[16];
    int n;
    n = recv(fd, in, 64, 0); // source:a
    copy(out, in, n);
    return 0;
}
